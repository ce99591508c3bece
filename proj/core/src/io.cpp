#include "mspum/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mspum {

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void write_vtk_cells(std::ofstream& out, const StructuredTriMesh& mesh) {
  out << "# vtk DataFile Version 3.0\n"
      << "mspum export\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.vertex_count() << " double\n";
  char buf[96];
  for (const Vec2& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.12g %.12g 0\n", p.x, p.y);
    out << buf;
  }
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
}

}  // namespace

void write_vtk_mesh(const StructuredTriMesh& mesh, const std::string& path) {
  auto out = open_or_throw(path);
  write_vtk_cells(out, mesh);
}

void write_vtk_point_data(const StructuredTriMesh& mesh,
                          const std::vector<std::pair<std::string, const Vec*>>& fields,
                          const std::string& path) {
  for (const auto& [name, v] : fields)
    if (v->size() != mesh.vertex_count())
      throw std::invalid_argument("write_vtk_point_data: field '" + name +
                                  "' is not on this mesh");
  auto out = open_or_throw(path);
  write_vtk_cells(out, mesh);
  out << "POINT_DATA " << mesh.vertex_count() << "\n";
  char buf[48];
  for (const auto& [name, v] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12g\n", (*v)[i]);
      out << buf;
    }
  }
}

void write_pgm(const PiecewiseConstantCoefficient& coeff,
               const StructuredTriMesh& mesh, const std::string& path) {
  if (coeff.mesh_n != mesh.n)
    throw std::invalid_argument("write_pgm: coefficient/mesh mismatch");
  const int n = mesh.n;
  const double lo = std::log10(coeff.alpha);
  const double hi = std::log10(coeff.beta);
  const double span = hi - lo;
  auto out = open_or_throw(path);
  out << "P2\n" << 2 * n << " " << 2 * n << "\n255\n";
  for (int row = 0; row < 2 * n; ++row) {
    const int py = 2 * n - 1 - row;  // image rows go top-down
    const int iy = py / 2, sy = py % 2;
    for (int px = 0; px < 2 * n; ++px) {
      const int ix = px / 2, sx = px % 2;
      // subpixels (1,0) and (0,0) show the lower triangle, the others the upper
      const int tri = 2 * (iy * n + ix) + ((sx == sy) ? (sx == 0 ? 0 : 1) : (sx == 1 ? 0 : 1));
      const double v = std::log10(coeff.values[tri]);
      const int gray = span > 0.0
          ? static_cast<int>(std::lround(255.0 * (v - lo) / span))
          : 128;
      out << std::min(255, std::max(0, gray));
      out << (px + 1 == 2 * n ? '\n' : ' ');
    }
  }
}

void write_decay_csv(const std::vector<double>& energies, const std::string& path) {
  auto out = open_or_throw(path);
  out << "k,e_k\n";
  char buf[48];
  for (size_t k = 0; k < energies.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.9e\n", k, energies[k]);
    out << buf;
  }
}

}  // namespace mspum
