#pragma once

#include <map>

#include "vhrec/mesh.hpp"
#include "vhrec/pointcloud.hpp"

namespace vhrec {

namespace detail {

struct Tet {
  int v[4];
  bool alive = true;
};

inline double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(cross(b - a, c - a), d - a);
}

// > 0 when e lies inside the circumsphere of the positively oriented (a,b,c,d).
inline double insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                       const Vec3& e) {
  const Vec3 ae = a - e, be = b - e, ce = c - e, de = d - e;
  const long double a2 = (long double)norm_sq(ae);
  const long double b2 = (long double)norm_sq(be);
  const long double c2 = (long double)norm_sq(ce);
  const long double d2 = (long double)norm_sq(de);
  auto det3 = [](long double m00, long double m01, long double m02, long double m10,
                 long double m11, long double m12, long double m20, long double m21,
                 long double m22) {
    return m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
           m02 * (m10 * m21 - m11 * m20);
  };
  const long double det =
      a2 * det3(be.x, be.y, be.z, ce.x, ce.y, ce.z, de.x, de.y, de.z) -
      b2 * det3(ae.x, ae.y, ae.z, ce.x, ce.y, ce.z, de.x, de.y, de.z) +
      c2 * det3(ae.x, ae.y, ae.z, be.x, be.y, be.z, de.x, de.y, de.z) -
      d2 * det3(ae.x, ae.y, ae.z, be.x, be.y, be.z, ce.x, ce.y, ce.z);
  return (double)det;
}

// circumradius of a tetrahedron; infinity for degenerate ones
inline double circumradius(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 ab = b - a, ac = c - a, ad = d - a;
  const double det = 2.0 * dot(ab, cross(ac, ad));
  if (std::abs(det) < 1e-30) return std::numeric_limits<double>::infinity();
  const Vec3 o = (cross(ac, ad) * norm_sq(ab) + cross(ad, ab) * norm_sq(ac) +
                  cross(ab, ac) * norm_sq(ad)) /
                 det;
  return norm(o);
}

// Bowyer-Watson over jittered copies of the points. Returns tetrahedra by
// original point indices; super-vertices already removed.
inline std::vector<std::array<int, 4>> delaunay(const std::vector<Vec3>& input, uint64_t seed) {
  const int n = (int)input.size();
  Aabb box;
  for (const Vec3& p : input) box.expand(p);
  const double scale = std::max(norm(box.extent()), 1e-12);

  // deterministic jitter breaks cospherical degeneracies (regular lattices,
  // quantized scans); connectivity only, radii use the original coordinates
  std::vector<Vec3> pts = input;
  {
    Rng rng(seed ^ 0x5bd1e995u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Vec3& p : pts) p += Vec3{u(rng), u(rng), u(rng)} * (1e-9 * scale);
  }

  const Vec3 center = box.center();
  const double big = 50.0 * scale + 1.0;
  pts.push_back(center + Vec3{big, 0, -big / std::sqrt(2.0)});
  pts.push_back(center + Vec3{-big, 0, -big / std::sqrt(2.0)});
  pts.push_back(center + Vec3{0, big, big / std::sqrt(2.0)});
  pts.push_back(center + Vec3{0, -big, big / std::sqrt(2.0)});

  std::vector<Tet> tets;
  {
    Tet t0;
    t0.v[0] = n;
    t0.v[1] = n + 1;
    t0.v[2] = n + 2;
    t0.v[3] = n + 3;
    if (orient3d(pts[t0.v[0]], pts[t0.v[1]], pts[t0.v[2]], pts[t0.v[3]]) < 0)
      std::swap(t0.v[0], t0.v[1]);
    tets.push_back(t0);
  }

  std::map<std::array<int, 3>, int> face_count;
  size_t dead = 0;
  for (int p = 0; p < n; ++p) {
    // cavity: every live tet whose circumsphere contains the point
    face_count.clear();
    bool any_bad = false;
    for (Tet& t : tets) {
      if (!t.alive) continue;
      if (insphere(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], pts[t.v[3]], pts[p]) <= 0) continue;
      any_bad = true;
      t.alive = false;
      ++dead;
      const int f[4][3] = {{t.v[0], t.v[1], t.v[2]},
                           {t.v[0], t.v[3], t.v[1]},
                           {t.v[1], t.v[3], t.v[2]},
                           {t.v[2], t.v[3], t.v[0]}};
      for (const auto& face : f) {
        std::array<int, 3> key{face[0], face[1], face[2]};
        std::sort(key.begin(), key.end());
        face_count[key] += 1;
      }
    }
    if (!any_bad) throw std::runtime_error("delaunay: point insertion found no cavity");

    // cavity boundary faces appear once; retriangulate toward p. The cavity
    // is star-shaped around p, so orienting each face away from p is valid.
    for (const auto& [key, count] : face_count) {
      if (count != 1) continue;
      Tet nt;
      nt.v[0] = key[0];
      nt.v[1] = key[1];
      nt.v[2] = key[2];
      nt.v[3] = p;
      if (orient3d(pts[nt.v[0]], pts[nt.v[1]], pts[nt.v[2]], pts[nt.v[3]]) < 0)
        std::swap(nt.v[0], nt.v[1]);
      tets.push_back(nt);
    }

    if (dead > tets.size() / 2) {
      std::erase_if(tets, [](const Tet& t) { return !t.alive; });
      dead = 0;
    }
  }

  std::vector<std::array<int, 4>> out;
  for (const Tet& t : tets) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n || t.v[3] >= n) continue;
    out.push_back({t.v[0], t.v[1], t.v[2], t.v[3]});
  }
  return out;
}

}  // namespace detail

// Boundary of the alpha complex: Delaunay tetrahedra with circumradius at
// most alpha, surfaced by the faces owned by exactly one kept tet. The
// result is not guaranteed watertight; query open_edge_count() to report it.
inline TriangleMesh alpha_shape(const std::vector<Vec3>& points, double alpha,
                                uint64_t seed = 0) {
  if (points.size() < 4) throw std::invalid_argument("alpha_shape: need at least 4 points");
  if (!(alpha > 0)) throw std::invalid_argument("alpha_shape: alpha must be > 0");
  const auto tets = detail::delaunay(points, seed);
  if (tets.empty()) throw std::invalid_argument("alpha_shape: degenerate input");

  std::vector<char> keep(tets.size(), 0);
  for (size_t t = 0; t < tets.size(); ++t) {
    const double r = detail::circumradius(points[tets[t][0]], points[tets[t][1]],
                                          points[tets[t][2]], points[tets[t][3]]);
    keep[t] = r <= alpha ? 1 : 0;
  }

  // faces used exactly once among kept tets, oriented away from the tet
  std::map<std::array<int, 3>, std::pair<std::array<int, 3>, int>> faces;
  for (size_t t = 0; t < tets.size(); ++t) {
    if (!keep[t]) continue;
    const auto& v = tets[t];
    const int f[4][3] = {{v[0], v[1], v[2]}, {v[0], v[3], v[1]}, {v[1], v[3], v[2]},
                         {v[2], v[3], v[0]}};
    const int opposite[4] = {v[3], v[2], v[0], v[1]};
    for (int k = 0; k < 4; ++k) {
      std::array<int, 3> key{f[k][0], f[k][1], f[k][2]};
      std::sort(key.begin(), key.end());
      auto it = faces.find(key);
      if (it == faces.end()) {
        std::array<int, 3> oriented{f[k][0], f[k][1], f[k][2]};
        // wind the face so its normal points away from the opposite vertex
        if (detail::orient3d(points[oriented[0]], points[oriented[1]], points[oriented[2]],
                             points[opposite[k]]) > 0)
          std::swap(oriented[1], oriented[2]);
        faces.emplace(key, std::make_pair(oriented, 1));
      } else {
        it->second.second += 1;
      }
    }
  }

  TriangleMesh mesh;
  std::vector<int> remap(points.size(), -1);
  for (const auto& [key, entry] : faces) {
    if (entry.second != 1) continue;
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      const int src = entry.first[k];
      if (remap[src] < 0) {
        remap[src] = (int)mesh.vertices.size();
        mesh.vertices.push_back(points[src]);
      }
      tri[k] = remap[src];
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

inline TriangleMesh alpha_shape(const PointCloud& cloud, double alpha, uint64_t seed = 0) {
  return alpha_shape(cloud.points, alpha, seed);
}

}  // namespace vhrec
