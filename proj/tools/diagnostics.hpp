#pragma once

#include <iosfwd>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace mspum::cli {

/// Machine-readable property checks: partition-of-unity sums, interpolation
/// constants, corrector orthogonality, decay fits. Writes
/// <out_dir>/diagnostics.json and returns the report; "pass" holds the overall
/// verdict.
nlohmann::ordered_json run_diagnostics(const ExperimentConfig& config,
                                       std::ostream& log);

}  // namespace mspum::cli
