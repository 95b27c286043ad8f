#pragma once

#include <functional>
#include <unordered_map>

#include "vhrec/mc_tables.hpp"
#include "vhrec/mesh.hpp"

namespace vhrec {

struct MarchingCubesOptions {
  // Clamp the outermost corner layer to a large positive value so the zero
  // level set is capped at the box and the output is closed.
  bool close_boundary = false;
  double iso = 0.0;
};

namespace detail {

struct CornerGrid {
  std::array<int, 3> n{0, 0, 0};  // corner counts per axis (cells + 1)
  Vec3 origin;
  Vec3 step;
  std::vector<double> values;

  size_t index(int i, int j, int k) const {
    return ((size_t)i * n[1] + j) * n[2] + k;
  }
  Vec3 position(int i, int j, int k) const {
    return origin + Vec3{i * step.x, j * step.y, k * step.z};
  }
};

// Unique key for a cell edge: the smaller corner's linear index plus the
// axis the edge runs along.
inline uint64_t edge_key(const CornerGrid& g, int i0, int j0, int k0, int i1, int j1, int k1) {
  size_t a = g.index(i0, j0, k0);
  size_t b = g.index(i1, j1, k1);
  int axis = i0 != i1 ? 0 : (j0 != j1 ? 1 : 2);
  return (uint64_t)std::min(a, b) * 4ull + (uint64_t)axis;
}

inline TriangleMesh extract_from_corner_grid(const CornerGrid& grid, double iso) {
  TriangleMesh mesh;
  std::unordered_map<uint64_t, int> edge_vertex;
  const int corner_off[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  double value[8];
  int corner_idx[8][3];
  int edge_to_vertex[12];

  for (int ci = 0; ci + 1 < grid.n[0]; ++ci) {
    for (int cj = 0; cj + 1 < grid.n[1]; ++cj) {
      for (int ck = 0; ck + 1 < grid.n[2]; ++ck) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          corner_idx[c][0] = ci + corner_off[c][0];
          corner_idx[c][1] = cj + corner_off[c][1];
          corner_idx[c][2] = ck + corner_off[c][2];
          value[c] = grid.values[grid.index(corner_idx[c][0], corner_idx[c][1], corner_idx[c][2])];
          if (value[c] < iso) cube |= 1 << c;
        }
        const uint16_t edges = kMcEdgeTable[cube];
        if (edges == 0) continue;
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int a = kMcEdgeCorners[e][0];
          const int b = kMcEdgeCorners[e][1];
          const uint64_t key =
              edge_key(grid, corner_idx[a][0], corner_idx[a][1], corner_idx[a][2],
                       corner_idx[b][0], corner_idx[b][1], corner_idx[b][2]);
          auto it = edge_vertex.find(key);
          if (it == edge_vertex.end()) {
            const double va = value[a];
            const double vb = value[b];
            double t = (iso - va) / (vb - va);  // signs differ, so vb != va
            t = std::clamp(t, 0.0, 1.0);
            const Vec3 pa =
                grid.position(corner_idx[a][0], corner_idx[a][1], corner_idx[a][2]);
            const Vec3 pb =
                grid.position(corner_idx[b][0], corner_idx[b][1], corner_idx[b][2]);
            it = edge_vertex.emplace(key, (int)mesh.vertices.size()).first;
            mesh.vertices.push_back(pa + (pb - pa) * t);
          }
          edge_to_vertex[e] = it->second;
        }
        const int8_t* tri = kMcTriTable[cube];
        for (int k = 0; tri[k] != -1; k += 3) {
          const int v0 = edge_to_vertex[(int)tri[k]];
          const int v1 = edge_to_vertex[(int)tri[k + 1]];
          const int v2 = edge_to_vertex[(int)tri[k + 2]];
          if (v0 == v1 || v1 == v2 || v0 == v2) continue;  // collapsed sliver
          // reversed so normals point toward positive field values
          mesh.triangles.push_back({v0, v2, v1});
        }
      }
    }
  }
  return mesh;
}

}  // namespace detail

// Extracts the iso surface of a sampled corner grid. `resolution` counts
// cells per axis; corners are resolution + 1 per axis.
inline TriangleMesh marching_cubes_grid(std::vector<double> corner_values,
                                        const Aabb& bbox, std::array<int, 3> resolution,
                                        const MarchingCubesOptions& opts = {}) {
  detail::CornerGrid grid;
  grid.n = {resolution[0] + 1, resolution[1] + 1, resolution[2] + 1};
  if (corner_values.size() != (size_t)grid.n[0] * grid.n[1] * grid.n[2])
    throw std::invalid_argument("marching_cubes_grid: corner count mismatch");
  grid.origin = bbox.lo;
  const Vec3 e = bbox.extent();
  grid.step = {e.x / resolution[0], e.y / resolution[1], e.z / resolution[2]};
  grid.values = std::move(corner_values);
  for (double& v : grid.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("marching_cubes: non-finite field value");
    if (v == opts.iso) v = opts.iso + 1e-30;  // break exact ties consistently
  }
  if (opts.close_boundary) {
    const double big = 1e9;
    for (int i = 0; i < grid.n[0]; ++i)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int k = 0; k < grid.n[2]; ++k)
          if (i == 0 || j == 0 || k == 0 || i == grid.n[0] - 1 || j == grid.n[1] - 1 ||
              k == grid.n[2] - 1)
            grid.values[grid.index(i, j, k)] = big;
  }
  return detail::extract_from_corner_grid(grid, opts.iso);
}

inline TriangleMesh marching_cubes(const std::function<double(const Vec3&)>& field,
                                   const Aabb& bbox, int resolution,
                                   const MarchingCubesOptions& opts = {}) {
  if (resolution < 2) throw std::invalid_argument("marching_cubes: resolution must be >= 2");
  const int n = resolution + 1;
  std::vector<double> values((size_t)n * n * n);
  const Vec3 e = bbox.extent();
  const Vec3 step{e.x / resolution, e.y / resolution, e.z / resolution};
  size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        values[idx++] = field(bbox.lo + Vec3{i * step.x, j * step.y, k * step.z});
  return marching_cubes_grid(std::move(values), bbox, {resolution, resolution, resolution}, opts);
}

}  // namespace vhrec
