#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace mspum {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform criss-pattern triangulation of the unit square with n subdivisions
/// per side. Every square cell is split along its bottom-left to top-right
/// diagonal, so all triangles are congruent right triangles with legs 1/n.
/// Vertices are ordered lexicographically by (row, column).
struct StructuredTriMesh {
  int n = 0;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::vector<int>> vertex_to_triangles;
  std::vector<bool> boundary_vertex;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int vertex_id(int ix, int iy) const { return iy * (n + 1) + ix; }

  /// All triangles have the same area 1/(2 n^2).
  double triangle_area() const { return 1.0 / (2.0 * n * n); }
  /// Element diameter (the hypotenuse), sqrt(2)/n.
  double diameter() const { return std::sqrt(2.0) / n; }

  Vec2 centroid(int t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
  }
  double signed_area(int t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }
};

StructuredTriMesh build_uniform_mesh(int n);

struct RefinedMesh {
  StructuredTriMesh mesh;        // parameter 2n
  std::vector<int> parent;       // child triangle -> parent triangle
};

/// Quadrisect every triangle via edge bisection. Children are similar to the
/// parent with half diameter; the result equals build_uniform_mesh(2n).
RefinedMesh red_refine(const StructuredTriMesh& mesh);

struct MeshHierarchy {
  StructuredTriMesh coarse;
  StructuredTriMesh fine;
  int levels = 0;                               // fine.n = coarse.n * 2^levels
  std::vector<int> fine_to_coarse_element;
  std::vector<std::vector<int>> coarse_to_fine_elements;
};

/// Nested coarse/fine pair with exact containment maps. Throws if the fine
/// subdivision count would exceed fine_cap.
MeshHierarchy build_hierarchy(int n_coarse, int levels, int fine_cap = 2048);

/// Extension patch around a coarse element: the anchor grown by m rounds of
/// vertex-touching element adjacency. free_fine_vertices are the fine dofs
/// whose zero-extension stays conforming (all incident fine triangles inside).
struct Patch {
  int anchor = -1;
  int m = 0;
  std::vector<int> coarse_elements;      // sorted
  std::vector<int> fine_elements;        // sorted
  std::vector<int> free_fine_vertices;   // sorted
};

Patch extend_patch(const MeshHierarchy& hier, int anchor, int m);

/// m large enough that extend_patch saturates at the whole domain for any anchor.
int saturation_layers(const StructuredTriMesh& coarse);

}  // namespace mspum
