#pragma once

#include "vhrec/mesh.hpp"
#include "vhrec/pointcloud.hpp"

namespace vhrec {

// Area-weighted uniform surface samples. Each sample carries the unit normal
// of its triangle, which points outward for outward-wound watertight meshes.
inline PointCloud sample_surface(const TriangleMesh& mesh, int n, Rng& rng) {
  if (mesh.empty()) throw std::invalid_argument("sample_surface: empty mesh");
  if (n < 1) throw std::invalid_argument("sample_surface: n must be >= 1");
  std::vector<double> cum(mesh.triangles.size());
  double total = 0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += mesh.face_area((int)t);
    cum[t] = total;
  }
  if (!(total > 0)) throw std::invalid_argument("sample_surface: zero-area mesh");

  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.normals.reserve(n);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double pick = u01(rng) * total;
    const size_t t = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    const auto& tri = mesh.triangles[std::min(t, mesh.triangles.size() - 1)];
    double r1 = std::sqrt(u01(rng));
    double r2 = u01(rng);
    const Vec3 p = mesh.vertices[tri[0]] * (1 - r1) + mesh.vertices[tri[1]] * (r1 * (1 - r2)) +
                   mesh.vertices[tri[2]] * (r1 * r2);
    cloud.add(p, mesh.face_normal((int)std::min(t, mesh.triangles.size() - 1)),
              PointSource::Visual);
  }
  return cloud;
}

inline PointCloud sample_surface(const TriangleMesh& mesh, int n, uint64_t seed = 0) {
  Rng rng(seed);
  return sample_surface(mesh, n, rng);
}

}  // namespace vhrec
