#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>

#include "vhrec/core.hpp"

namespace vhrec {

// Indexed triangle surface. Triangles are wound counter-clockwise when seen
// from outside, so the geometric normal of a watertight mesh points outward.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }

  Aabb bounds() const {
    Aabb box;
    for (const Vec3& v : vertices) box.expand(v);
    return box;
  }

  Vec3 face_normal_raw(int t) const {
    const auto& tri = triangles[t];
    return cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
  }

  Vec3 face_normal(int t) const { return normalized(face_normal_raw(t)); }

  double face_area(int t) const { return 0.5 * norm(face_normal_raw(t)); }

  double area() const {
    double a = 0;
    for (int t = 0; t < (int)triangles.size(); ++t) a += face_area(t);
    return a;
  }

  // Signed volume via the divergence theorem; positive for outward winding.
  double signed_volume() const {
    double v = 0;
    for (const auto& tri : triangles) {
      const Vec3& a = vertices[tri[0]];
      const Vec3& b = vertices[tri[1]];
      const Vec3& c = vertices[tri[2]];
      v += dot(a, cross(b, c));
    }
    return v / 6.0;
  }

  void flip_winding() {
    for (auto& tri : triangles) std::swap(tri[1], tri[2]);
  }

  // Flips winding if the enclosed signed volume is negative.
  void orient_outward() {
    if (signed_volume() < 0) flip_winding();
  }

  void validate() const {
    const int n = (int)vertices.size();
    for (const auto& tri : triangles) {
      for (int k = 0; k < 3; ++k) {
        if (tri[k] < 0 || tri[k] >= n) throw std::invalid_argument("triangle index out of range");
      }
      if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
        throw std::invalid_argument("triangle repeats a vertex index");
    }
  }

  // Number of undirected edges not shared by exactly two triangles.
  int open_edge_count() const {
    std::unordered_map<uint64_t, int> edges;
    edges.reserve(triangles.size() * 3);
    for (const auto& tri : triangles) {
      for (int k = 0; k < 3; ++k) {
        const uint64_t a = (uint64_t)std::min(tri[k], tri[(k + 1) % 3]);
        const uint64_t b = (uint64_t)std::max(tri[k], tri[(k + 1) % 3]);
        edges[(a << 32) | b] += 1;
      }
    }
    int open = 0;
    for (const auto& [key, count] : edges)
      if (count != 2) ++open;
    return open;
  }

  bool is_watertight() const { return open_edge_count() == 0; }
};

struct NormalizeResult {
  TriangleMesh mesh;
  double scale = 1.0;       // applied after translation
  Vec3 translation;         // applied first
};

// Centers the mesh at the origin and scales it so the longest axis-aligned
// extent is exactly 2 (coordinates within [-1, 1] along the longest axis).
inline NormalizeResult normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw std::invalid_argument("normalize_mesh: empty mesh");
  const Aabb box = mesh.bounds();
  const double longest = box.longest_extent();
  if (!(longest > 0)) throw std::invalid_argument("normalize_mesh: zero extent");
  NormalizeResult r;
  r.translation = -box.center();
  r.scale = 2.0 / longest;
  r.mesh = mesh;
  for (Vec3& v : r.mesh.vertices) v = (v + r.translation) * r.scale;
  return r;
}

inline TriangleMesh rotate_mesh(const TriangleMesh& mesh, const std::array<Vec3, 3>& rows) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)};
  return out;
}

// Uniform random rotation matrix (rows) from a quaternion.
inline std::array<Vec3, 3> random_rotation(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  double q[4];
  double s = 0;
  do {
    for (double& qi : q) qi = n01(rng);
    s = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
  } while (s < 1e-12);
  const double inv = 1.0 / std::sqrt(s);
  const double w = q[0] * inv, x = q[1] * inv, y = q[2] * inv, z = q[3] * inv;
  return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
          Vec3{2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
          Vec3{2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
}

}  // namespace vhrec
