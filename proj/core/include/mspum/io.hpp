#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mspum/coefficient.hpp"
#include "mspum/fem.hpp"
#include "mspum/geometry.hpp"

namespace mspum {

/// Legacy ASCII VTK unstructured grid, cells only.
void write_vtk_mesh(const StructuredTriMesh& mesh, const std::string& path);

/// Legacy ASCII VTK with one scalar point-data field per entry.
void write_vtk_point_data(const StructuredTriMesh& mesh,
                          const std::vector<std::pair<std::string, const Vec*>>& fields,
                          const std::string& path);

/// Per-element coefficient raster as an ASCII PGM, two pixels per triangle,
/// log10 grayscale between alpha and beta.
void write_pgm(const PiecewiseConstantCoefficient& coeff,
               const StructuredTriMesh& mesh, const std::string& path);

/// Decay profile as CSV rows (k, e_k).
void write_decay_csv(const std::vector<double>& energies, const std::string& path);

}  // namespace mspum
