#pragma once

#include <deque>
#include <map>

#include "vhrec/mesh.hpp"
#include "vhrec/pointcloud.hpp"

namespace vhrec {

namespace detail {

struct HullFace {
  int v[3];
  Vec3 normal;        // unit outward
  double offset;      // plane offset, dot(normal, x) = offset
  std::vector<int> outside;  // points strictly above this face
  int farthest = -1;
  double farthest_dist = 0;
  bool alive = true;
};

inline double point_plane(const HullFace& f, const Vec3& p) {
  return dot(f.normal, p) - f.offset;
}

}  // namespace detail

// Incremental quickhull. Output is a watertight triangle mesh with outward
// winding whose vertex list contains only referenced points.
inline TriangleMesh convex_hull(const std::vector<Vec3>& points) {
  const int n = (int)points.size();
  if (n < 4) throw std::invalid_argument("convex_hull: need at least 4 points");

  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  const double scale = std::max(norm(box.extent()), 1e-30);
  const double eps = 1e-12 * scale;

  // initial simplex: extremes along x, farthest from their line, farthest
  // from the resulting plane
  int i0 = 0, i1 = 0;
  for (int i = 1; i < n; ++i) {
    if (points[i].x < points[i0].x) i0 = i;
    if (points[i].x > points[i1].x) i1 = i;
  }
  if (norm(points[i1] - points[i0]) < eps) {
    // x-degenerate; scan all pairs of bbox extremes
    for (int a = 0; a < n && i0 == i1; ++a)
      for (int b = a + 1; b < n; ++b)
        if (norm(points[b] - points[a]) > eps) {
          i0 = a;
          i1 = b;
          break;
        }
    if (i0 == i1) throw std::invalid_argument("convex_hull: all points coincide");
  }
  int i2 = -1;
  double best = eps;
  const Vec3 axis = normalized(points[i1] - points[i0]);
  for (int i = 0; i < n; ++i) {
    const Vec3 d = points[i] - points[i0];
    const double dist = norm(d - axis * dot(d, axis));
    if (dist > best) {
      best = dist;
      i2 = i;
    }
  }
  if (i2 < 0) throw std::invalid_argument("convex_hull: points are collinear");
  int i3 = -1;
  best = eps;
  const Vec3 pn = normalized(cross(points[i1] - points[i0], points[i2] - points[i0]));
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(dot(pn, points[i] - points[i0]));
    if (dist > best) {
      best = dist;
      i3 = i;
    }
  }
  if (i3 < 0) throw std::invalid_argument("convex_hull: points are coplanar");

  std::vector<detail::HullFace> faces;
  const Vec3 centroid = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
  auto add_face = [&](int a, int b, int c) {
    detail::HullFace f;
    Vec3 nrm = cross(points[b] - points[a], points[c] - points[a]);
    const double len = norm(nrm);
    if (len < 1e-30) nrm = {0, 0, 1};
    else nrm = nrm / len;
    if (dot(nrm, points[a] - centroid) < 0) {
      std::swap(b, c);
      nrm = -nrm;
    }
    f.v[0] = a;
    f.v[1] = b;
    f.v[2] = c;
    f.normal = nrm;
    f.offset = dot(nrm, points[a]);
    faces.push_back(std::move(f));
    return (int)faces.size() - 1;
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  auto assign_outside = [&](detail::HullFace& f, const std::vector<int>& candidates) {
    for (int i : candidates) {
      const double d = detail::point_plane(f, points[i]);
      if (d > eps) {
        f.outside.push_back(i);
        if (d > f.farthest_dist) {
          f.farthest_dist = d;
          f.farthest = i;
        }
      }
    }
  };
  {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (auto& f : faces) assign_outside(f, all);
  }

  // main loop: expand toward the farthest outside point of any face
  for (;;) {
    int face_idx = -1;
    for (int i = 0; i < (int)faces.size(); ++i)
      if (faces[i].alive && !faces[i].outside.empty()) {
        face_idx = i;
        break;
      }
    if (face_idx < 0) break;
    const int apex = faces[face_idx].farthest;
    const Vec3& ap = points[apex];

    // adjacency over alive faces for this expansion
    std::unordered_map<uint64_t, std::array<int, 2>> edge_faces;
    edge_faces.reserve(faces.size() * 2);
    auto edge_key = [](int a, int b) {
      return ((uint64_t)std::min(a, b) << 32) | (uint64_t)std::max(a, b);
    };
    for (int fi = 0; fi < (int)faces.size(); ++fi) {
      if (!faces[fi].alive) continue;
      for (int k = 0; k < 3; ++k) {
        auto& slot = edge_faces[edge_key(faces[fi].v[k], faces[fi].v[(k + 1) % 3])];
        if (slot[0] == 0 && slot[1] == 0) slot = {-1, -1};
        (slot[0] < 0 ? slot[0] : slot[1]) = fi;
      }
    }

    // visible set, grown over shared edges
    std::vector<int> visible;
    std::vector<char> seen(faces.size(), 0);
    std::deque<int> queue{face_idx};
    seen[face_idx] = 1;
    while (!queue.empty()) {
      const int fi = queue.front();
      queue.pop_front();
      visible.push_back(fi);
      for (int k = 0; k < 3; ++k) {
        const auto it = edge_faces.find(edge_key(faces[fi].v[k], faces[fi].v[(k + 1) % 3]));
        if (it == edge_faces.end()) continue;
        for (int gi : it->second) {
          if (gi < 0 || gi == fi || seen[gi] || !faces[gi].alive) continue;
          if (detail::point_plane(faces[gi], ap) > eps) {
            seen[gi] = 1;
            queue.push_back(gi);
          }
        }
      }
    }

    // horizon: edges of visible faces bordering non-visible ones
    std::map<std::pair<int, int>, std::pair<int, int>> edge_count;  // sorted -> oriented
    for (int fi : visible) {
      for (int k = 0; k < 3; ++k) {
        const int a = faces[fi].v[k];
        const int b = faces[fi].v[(k + 1) % 3];
        const auto key = std::minmax(a, b);
        auto it = edge_count.find(key);
        if (it == edge_count.end())
          edge_count.emplace(key, std::make_pair(a, b));
        else
          edge_count.erase(it);  // interior edge, appears twice
      }
    }

    std::vector<int> pool;
    for (int fi : visible) {
      for (int i : faces[fi].outside)
        if (i != apex) pool.push_back(i);
      faces[fi].alive = false;
      faces[fi].outside.clear();
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    for (const auto& [key, oriented] : edge_count) {
      // horizon edge kept in the visible face's winding keeps the new face outward
      const int fi = add_face(oriented.first, oriented.second, apex);
      assign_outside(faces[fi], pool);
    }
  }

  // compact referenced vertices
  TriangleMesh mesh;
  std::vector<int> remap(n, -1);
  for (const auto& f : faces) {
    if (!f.alive) continue;
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      if (remap[f.v[k]] < 0) {
        remap[f.v[k]] = (int)mesh.vertices.size();
        mesh.vertices.push_back(points[f.v[k]]);
      }
      tri[k] = remap[f.v[k]];
    }
    mesh.triangles.push_back(tri);
  }
  mesh.validate();
  return mesh;
}

inline TriangleMesh convex_hull(const PointCloud& cloud) { return convex_hull(cloud.points); }

}  // namespace vhrec
