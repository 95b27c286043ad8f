#pragma once

#include <map>

#include "vhrec/mesh.hpp"

namespace vhrec {

inline TriangleMesh make_box(const Vec3& half_extent, const Vec3& center = {}) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(center + Vec3{(i & 1) ? half_extent.x : -half_extent.x,
                                       (i & 2) ? half_extent.y : -half_extent.y,
                                       (i & 4) ? half_extent.z : -half_extent.z});
  }
  // two triangles per face, outward winding
  const int f[12][3] = {{0, 2, 1}, {1, 2, 3},   // z-
                        {4, 5, 6}, {5, 7, 6},   // z+
                        {0, 1, 4}, {1, 5, 4},   // y-
                        {2, 6, 3}, {3, 6, 7},   // y+
                        {0, 4, 2}, {2, 4, 6},   // x-
                        {1, 3, 5}, {3, 7, 5}};  // x+
  for (const auto& t : f) m.triangles.push_back({t[0], t[1], t[2]});
  return m;
}

// Icosahedron subdivided `subdiv` times, vertices projected to the sphere.
inline TriangleMesh make_icosphere(double radius, int subdiv = 3, const Vec3& center = {}) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : raw) m.vertices.push_back(normalized(Vec3{v[0], v[1], v[2]}));
  const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                            {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                            {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                            {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (const auto& f : faces) m.triangles.push_back({f[0], f[1], f[2]});

  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      const int idx = (int)m.vertices.size();
      m.vertices.push_back(normalized((m.vertices[a] + m.vertices[b]) * 0.5));
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      const int ab = midpoint(tri[0], tri[1]);
      const int bc = midpoint(tri[1], tri[2]);
      const int ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  for (Vec3& v : m.vertices) v = center + v * radius;
  return m;
}

// Closed cylinder along z with fan caps.
inline TriangleMesh make_cylinder(double radius, double height, int segments = 48) {
  TriangleMesh m;
  const double hz = height / 2;
  for (int i = 0; i < segments; ++i) {
    const double a = 2 * M_PI * i / segments;
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), -hz});
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), hz});
  }
  const int bottom_c = (int)m.vertices.size();
  m.vertices.push_back({0, 0, -hz});
  const int top_c = (int)m.vertices.size();
  m.vertices.push_back({0, 0, hz});
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    m.triangles.push_back({b0, b1, t0});
    m.triangles.push_back({b1, t1, t0});
    m.triangles.push_back({bottom_c, b1, b0});
    m.triangles.push_back({top_c, t0, t1});
  }
  return m;
}

// Capsule: cylinder of given half-length with hemispherical caps, axis z.
inline TriangleMesh make_capsule(double radius, double half_length, int segments = 32,
                                 int rings = 8) {
  TriangleMesh m;
  // stacked latitude rows: south pole, lower hemisphere rings, cylinder seam
  // rows, upper hemisphere rings, north pole
  std::vector<std::vector<int>> rows;
  auto add_ring = [&](double r, double z) {
    std::vector<int> row;
    for (int i = 0; i < segments; ++i) {
      const double a = 2 * M_PI * i / segments;
      row.push_back((int)m.vertices.size());
      m.vertices.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    rows.push_back(row);
  };
  const int south = (int)m.vertices.size();
  m.vertices.push_back({0, 0, -half_length - radius});
  for (int k = 1; k <= rings; ++k) {
    const double phi = M_PI / 2 * (1.0 - (double)k / rings);  // from pole to equator
    add_ring(radius * std::cos(phi), -half_length - radius * std::sin(phi));
  }
  add_ring(radius, half_length);  // upper cylinder seam
  for (int k = 1; k <= rings; ++k) {
    const double phi = M_PI / 2 * ((double)k / rings);
    add_ring(radius * std::cos(phi), half_length + radius * std::sin(phi));
  }
  const int north = (int)m.vertices.size();
  m.vertices.push_back({0, 0, half_length + radius});

  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    m.triangles.push_back({south, rows[0][j], rows[0][i]});
    m.triangles.push_back({north, rows.back()[i], rows.back()[j]});
  }
  for (size_t r = 0; r + 1 < rows.size(); ++r) {
    for (int i = 0; i < segments; ++i) {
      const int j = (i + 1) % segments;
      m.triangles.push_back({rows[r][i], rows[r][j], rows[r + 1][i]});
      m.triangles.push_back({rows[r][j], rows[r + 1][j], rows[r + 1][i]});
    }
  }
  return m;
}

namespace detail {
inline double sgn_pow(double v, double e) {
  return v < 0 ? -std::pow(-v, e) : std::pow(v, e);
}
}  // namespace detail

// Superellipsoid with semi-axes (a, b, c) and shape exponents e1 (north-south)
// and e2 (east-west). e1 = e2 = 1 is an ellipsoid; values toward 0 square off.
inline TriangleMesh make_superellipsoid(double a, double b, double c, double e1, double e2,
                                        int lat = 24, int lon = 48) {
  TriangleMesh m;
  std::vector<std::vector<int>> rows;
  for (int i = 1; i < lat; ++i) {
    const double u = -M_PI / 2 + M_PI * i / lat;
    const double cu = detail::sgn_pow(std::cos(u), e1);
    const double su = detail::sgn_pow(std::sin(u), e1);
    std::vector<int> row;
    for (int j = 0; j < lon; ++j) {
      const double v = -M_PI + 2 * M_PI * j / lon;
      row.push_back((int)m.vertices.size());
      m.vertices.push_back({a * cu * detail::sgn_pow(std::cos(v), e2),
                            b * cu * detail::sgn_pow(std::sin(v), e2), c * su});
    }
    rows.push_back(row);
  }
  const int south = (int)m.vertices.size();
  m.vertices.push_back({0, 0, -c});
  const int north = (int)m.vertices.size();
  m.vertices.push_back({0, 0, c});

  for (int j = 0; j < lon; ++j) {
    const int k = (j + 1) % lon;
    m.triangles.push_back({south, rows[0][k], rows[0][j]});
    m.triangles.push_back({north, rows.back()[j], rows.back()[k]});
  }
  for (size_t r = 0; r + 1 < rows.size(); ++r) {
    for (int j = 0; j < lon; ++j) {
      const int k = (j + 1) % lon;
      m.triangles.push_back({rows[r][j], rows[r][k], rows[r + 1][j]});
      m.triangles.push_back({rows[r][k], rows[r + 1][k], rows[r + 1][j]});
    }
  }
  return m;
}

}  // namespace vhrec
