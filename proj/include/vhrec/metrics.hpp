#pragma once

#include "vhrec/kdtree.hpp"
#include "vhrec/pointcloud.hpp"
#include "vhrec/voxelgrid.hpp"

namespace vhrec {

// Symmetric Chamfer distance: the two directed mean nearest-neighbor
// distances, averaged. Distances are plain Euclidean, not squared.
inline double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chamfer_distance: empty cloud");
  const KdTree tree_a(a.points);
  const KdTree tree_b(b.points);
  double sum_ab = 0;
  for (const Vec3& p : a.points) sum_ab += std::sqrt(tree_b.nearest(p).second);
  double sum_ba = 0;
  for (const Vec3& p : b.points) sum_ba += std::sqrt(tree_a.nearest(p).second);
  return 0.5 * (sum_ab / (double)a.size() + sum_ba / (double)b.size());
}

// Intersection-over-union of occupied voxel sets; 1 when both grids are empty.
inline double jaccard_similarity(const VoxelGrid& a, const VoxelGrid& b) {
  if (!a.same_lattice(b)) throw std::invalid_argument("jaccard_similarity: lattice mismatch");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    const bool oa = a.values[i] != 0.0;
    const bool ob = b.values[i] != 0.0;
    if (oa && ob) ++inter;
    if (oa || ob) ++uni;
  }
  return uni == 0 ? 1.0 : (double)inter / (double)uni;
}

}  // namespace vhrec
