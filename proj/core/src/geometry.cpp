#include "mspum/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace mspum {

StructuredTriMesh build_uniform_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_uniform_mesh: n must be >= 1");
  StructuredTriMesh mesh;
  mesh.n = n;
  const int n1 = n + 1;
  mesh.vertices.reserve(static_cast<size_t>(n1) * n1);
  for (int iy = 0; iy < n1; ++iy)
    for (int ix = 0; ix < n1; ++ix)
      mesh.vertices.push_back({static_cast<double>(ix) / n, static_cast<double>(iy) / n});

  mesh.triangles.reserve(static_cast<size_t>(2) * n * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int bl = iy * n1 + ix;
      const int br = bl + 1;
      const int tl = bl + n1;
      const int tr = tl + 1;
      mesh.triangles.push_back({bl, br, tr});  // lower, CCW
      mesh.triangles.push_back({bl, tr, tl});  // upper, CCW
    }
  }

  mesh.vertex_to_triangles.resize(mesh.vertices.size());
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int v : mesh.triangles[t]) mesh.vertex_to_triangles[v].push_back(t);

  mesh.boundary_vertex.resize(mesh.vertices.size());
  for (int iy = 0; iy < n1; ++iy)
    for (int ix = 0; ix < n1; ++ix)
      mesh.boundary_vertex[iy * n1 + ix] = (ix == 0 || ix == n || iy == 0 || iy == n);
  return mesh;
}

namespace {

// Parent of fine triangle t (mesh parameter 2n) in the n-mesh, one level up.
// The criss pattern is nested: child cell parity decides which parent half
// the child lies in, with the two off-diagonal subcells fixed by geometry.
int parent_one_level(int t, int n_fine) {
  const int cell = t / 2;
  int tau = t % 2;
  const int fx = cell % n_fine;
  const int fy = cell / n_fine;
  const int bx = fx & 1, by = fy & 1;
  if (bx == 1 && by == 0) tau = 0;
  else if (bx == 0 && by == 1) tau = 1;
  const int n_coarse = n_fine / 2;
  return 2 * ((fy / 2) * n_coarse + (fx / 2)) + tau;
}

}  // namespace

RefinedMesh red_refine(const StructuredTriMesh& mesh) {
  RefinedMesh out;
  out.mesh = build_uniform_mesh(2 * mesh.n);
  out.parent.resize(out.mesh.triangle_count());
  for (int t = 0; t < out.mesh.triangle_count(); ++t)
    out.parent[t] = parent_one_level(t, out.mesh.n);
  return out;
}

MeshHierarchy build_hierarchy(int n_coarse, int levels, int fine_cap) {
  if (n_coarse < 1) throw std::invalid_argument("build_hierarchy: n_coarse must be >= 1");
  if (levels < 0) throw std::invalid_argument("build_hierarchy: levels must be >= 0");
  const long n_fine = static_cast<long>(n_coarse) << levels;
  if (n_fine > fine_cap)
    throw std::invalid_argument("build_hierarchy: fine mesh parameter " +
                                std::to_string(n_fine) + " exceeds cap " +
                                std::to_string(fine_cap));

  MeshHierarchy hier;
  hier.coarse = build_uniform_mesh(n_coarse);
  hier.fine = levels == 0 ? hier.coarse : build_uniform_mesh(static_cast<int>(n_fine));
  hier.levels = levels;

  hier.fine_to_coarse_element.resize(hier.fine.triangle_count());
  for (int t = 0; t < hier.fine.triangle_count(); ++t) {
    int cur = t;
    int n = hier.fine.n;
    for (int l = 0; l < levels; ++l) {
      cur = parent_one_level(cur, n);
      n /= 2;
    }
    hier.fine_to_coarse_element[t] = cur;
  }
  hier.coarse_to_fine_elements.resize(hier.coarse.triangle_count());
  for (int t = 0; t < hier.fine.triangle_count(); ++t)
    hier.coarse_to_fine_elements[hier.fine_to_coarse_element[t]].push_back(t);
  return hier;
}

int saturation_layers(const StructuredTriMesh& coarse) { return 2 * coarse.n; }

Patch extend_patch(const MeshHierarchy& hier, int anchor, int m) {
  const auto& coarse = hier.coarse;
  if (anchor < 0 || anchor >= coarse.triangle_count())
    throw std::invalid_argument("extend_patch: invalid anchor element");
  if (m < 0) throw std::invalid_argument("extend_patch: m must be >= 0");

  Patch patch;
  patch.anchor = anchor;
  patch.m = m;

  // one round = vertex-touching element adjacency, then completion of split
  // cells: patches are bookkept on the square cells underneath the
  // triangulation, with the order-zero patch staying the bare anchor element
  std::vector<char> in_patch(coarse.triangle_count(), 0);
  std::vector<int> frontier{anchor};
  in_patch[anchor] = 1;
  for (int round = 0; round < m && !frontier.empty(); ++round) {
    std::vector<int> next;
    for (int t : frontier) {
      for (int v : coarse.triangles[t]) {
        for (int nb : coarse.vertex_to_triangles[v]) {
          if (!in_patch[nb]) {
            in_patch[nb] = 1;
            next.push_back(nb);
          }
        }
      }
    }
    for (int t = 0; t < coarse.triangle_count(); ++t) {
      if (in_patch[t] && !in_patch[t ^ 1]) {
        in_patch[t ^ 1] = 1;
        next.push_back(t ^ 1);
      }
    }
    frontier = std::move(next);
  }
  for (int t = 0; t < coarse.triangle_count(); ++t)
    if (in_patch[t]) patch.coarse_elements.push_back(t);

  std::vector<char> fine_in(hier.fine.triangle_count(), 0);
  for (int ct : patch.coarse_elements) {
    for (int ft : hier.coarse_to_fine_elements[ct]) {
      fine_in[ft] = 1;
      patch.fine_elements.push_back(ft);
    }
  }
  std::sort(patch.fine_elements.begin(), patch.fine_elements.end());

  // a fine vertex is free iff every incident fine triangle is in the patch
  std::vector<char> seen(hier.fine.vertex_count(), 0);
  for (int ft : patch.fine_elements)
    for (int v : hier.fine.triangles[ft]) seen[v] = 1;
  for (int v = 0; v < hier.fine.vertex_count(); ++v) {
    if (!seen[v]) continue;
    bool free = true;
    for (int t : hier.fine.vertex_to_triangles[v])
      if (!fine_in[t]) { free = false; break; }
    if (free) patch.free_fine_vertices.push_back(v);
  }
  return patch;
}

}  // namespace mspum
