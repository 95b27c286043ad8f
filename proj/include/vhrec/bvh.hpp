#pragma once

#include <optional>

#include "vhrec/mesh.hpp"

namespace vhrec {

struct Hit {
  double t = 0;       // ray parameter of the intersection
  Vec3 point;
  Vec3 normal;        // unit, oriented so that dot(normal, direction) < 0
  int triangle = -1;
};

namespace detail {

// Moller-Trumbore with inclusive barycentric bounds.
inline bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& v0, const Vec3& v1,
                         const Vec3& v2, double& t_out) {
  constexpr double kEps = 1e-14;
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 pvec = cross(d, e2);
  const double det = dot(e1, pvec);
  if (std::abs(det) < kEps) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = o - v0;
  const double u = dot(tvec, pvec) * inv_det;
  if (u < -1e-12 || u > 1 + 1e-12) return false;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(d, qvec) * inv_det;
  if (v < -1e-12 || u + v > 1 + 1e-12) return false;
  t_out = dot(e2, qvec) * inv_det;
  return true;
}

inline bool ray_aabb(const Vec3& o, const Vec3& inv_d, const Aabb& box, double t_max) {
  double t0 = 0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    const double near = (box.lo[k] - o[k]) * inv_d[k];
    const double far = (box.hi[k] - o[k]) * inv_d[k];
    t0 = std::max(t0, std::min(near, far));
    t1 = std::min(t1, std::max(near, far));
  }
  return t0 <= t1;
}

}  // namespace detail

// Bounding volume hierarchy over mesh triangles, median split on the longest
// centroid axis. The mesh must outlive the Bvh.
class Bvh {
 public:
  static constexpr double kMinT = 1e-9;

  explicit Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    const int n = (int)mesh.triangles.size();
    order_.resize(n);
    centroids_.resize(n);
    for (int i = 0; i < n; ++i) {
      order_[i] = i;
      const auto& tri = mesh.triangles[i];
      centroids_[i] =
          (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    }
    if (n > 0) build(0, n);
    centroids_.clear();
    centroids_.shrink_to_fit();
  }

  std::optional<Hit> intersect(const Vec3& origin, const Vec3& direction, double t_min = kMinT,
                               double t_max = std::numeric_limits<double>::infinity()) const {
    if (!is_unit(direction)) throw std::invalid_argument("ray direction must be unit length");
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv_d{1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z};
    double best_t = t_max;
    int best_tri = -1;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!detail::ray_aabb(origin, inv_d, node.box, best_t)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i) {
          const int tri = order_[i];
          const auto& idx = mesh_->triangles[tri];
          double t;
          if (detail::ray_triangle(origin, direction, mesh_->vertices[idx[0]],
                                   mesh_->vertices[idx[1]], mesh_->vertices[idx[2]], t) &&
              t > t_min && t < best_t) {
            best_t = t;
            best_tri = tri;
          }
        }
      } else {
        stack[sp++] = node.first;
        stack[sp++] = node.right;
      }
    }
    if (best_tri < 0) return std::nullopt;
    Hit hit;
    hit.t = best_t;
    hit.triangle = best_tri;
    hit.point = origin + direction * best_t;
    Vec3 n = mesh_->face_normal(best_tri);
    if (dot(n, direction) > 0) n = -n;
    hit.normal = n;
    return hit;
  }

  // Number of crossings with t > t_min; parity gives inside/outside for
  // watertight meshes.
  int count_crossings(const Vec3& origin, const Vec3& direction, double t_min = kMinT) const {
    if (nodes_.empty()) return 0;
    const Vec3 inv_d{1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z};
    int crossings = 0;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    const double inf = std::numeric_limits<double>::infinity();
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!detail::ray_aabb(origin, inv_d, node.box, inf)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i) {
          const int tri = order_[i];
          const auto& idx = mesh_->triangles[tri];
          double t;
          if (detail::ray_triangle(origin, direction, mesh_->vertices[idx[0]],
                                   mesh_->vertices[idx[1]], mesh_->vertices[idx[2]], t) &&
              t > t_min)
            ++crossings;
        }
      } else {
        stack[sp++] = node.first;
        stack[sp++] = node.right;
      }
    }
    return crossings;
  }

  const TriangleMesh& mesh() const { return *mesh_; }

 private:
  struct Node {
    Aabb box;
    int first = 0;  // leaf: index into order_; inner: index of left child node
    int count = 0;  // leaf: triangle count; inner: 0
    int right = -1; // inner: index of right child node
  };

  static constexpr int kLeafSize = 4;

  int build(int begin, int end) {
    const int node_index = (int)nodes_.size();
    nodes_.emplace_back();
    Aabb box;
    Aabb cbox;
    for (int i = begin; i < end; ++i) {
      const auto& tri = mesh_->triangles[order_[i]];
      for (int k = 0; k < 3; ++k) box.expand(mesh_->vertices[tri[k]]);
      cbox.expand(centroids_[order_[i]]);
    }
    nodes_[node_index].box = box;
    const int count = end - begin;
    const Vec3 ce = cbox.extent();
    const int axis = ce.x >= ce.y ? (ce.x >= ce.z ? 0 : 2) : (ce.y >= ce.z ? 1 : 2);
    if (count <= kLeafSize || ce[axis] <= 0) {
      nodes_[node_index].first = begin;
      nodes_[node_index].count = count;
      return node_index;
    }
    const int mid = begin + count / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return centroids_[a][axis] < centroids_[b][axis]; });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[node_index].first = left;
    nodes_[node_index].count = 0;
    nodes_[node_index].right = right;
    return node_index;
  }

  const TriangleMesh* mesh_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

// One-shot convenience; builds a BVH per call. Use Bvh directly in loops.
inline std::optional<Hit> ray_mesh_intersect(const Vec3& origin, const Vec3& direction,
                                             const TriangleMesh& mesh) {
  if (mesh.empty()) throw std::invalid_argument("ray_mesh_intersect: empty mesh");
  return Bvh(mesh).intersect(origin, direction);
}

}  // namespace vhrec
