#include <catch2/catch_amalgamated.hpp>

#include "vhrec/bvh.hpp"
#include "vhrec/primitives.hpp"

using namespace vhrec;

namespace {

// Independent brute-force reference: plane intersection + inside test via
// edge cross products, no shared code with the BVH path.
std::optional<Hit> brute_force_intersect(const Vec3& o, const Vec3& d, const TriangleMesh& mesh) {
  std::optional<Hit> best;
  for (int t = 0; t < (int)mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const Vec3 n = cross(b - a, c - a);
    const double denom = dot(n, d);
    if (std::abs(denom) < 1e-14) continue;
    const double tt = dot(n, a - o) / denom;
    if (tt <= 1e-9) continue;
    const Vec3 p = o + d * tt;
    const double s1 = dot(n, cross(b - a, p - a));
    const double s2 = dot(n, cross(c - b, p - b));
    const double s3 = dot(n, cross(a - c, p - c));
    const double tol = -1e-12 * norm_sq(n);
    if (s1 < tol || s2 < tol || s3 < tol) continue;
    if (!best || tt < best->t) {
      Hit h;
      h.t = tt;
      h.point = p;
      h.triangle = t;
      Vec3 un = normalized(n);
      if (dot(un, d) > 0) un = -un;
      h.normal = un;
      best = h;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("ray hits cube face at analytic distance") {
  const TriangleMesh cube = make_box({0.5, 0.5, 0.5});
  const auto hit = ray_mesh_intersect({-2, 0, 0}, {1, 0, 0}, cube);
  REQUIRE(hit);
  CHECK(hit->t == Catch::Approx(1.5));
  CHECK(norm(hit->point - Vec3{-0.5, 0, 0}) < 1e-12);
  CHECK(dot(hit->normal, Vec3{1, 0, 0}) < 0);
}

TEST_CASE("ray pointing away misses") {
  const TriangleMesh cube = make_box({0.5, 0.5, 0.5});
  CHECK_FALSE(ray_mesh_intersect({0, 0, -3}, {0, 0, -1}, cube));
}

TEST_CASE("ray-sphere distance matches analytic solution") {
  const TriangleMesh sphere = make_icosphere(1.0, 5);
  const auto hit = ray_mesh_intersect({0, 0, -3}, {0, 0, 1}, sphere);
  REQUIRE(hit);
  CHECK(std::abs(hit->t - 2.0) < 2e-3);  // fine tessellation error
}

TEST_CASE("non-unit direction is rejected") {
  const TriangleMesh cube = make_box({0.5, 0.5, 0.5});
  CHECK_THROWS_AS(ray_mesh_intersect({-2, 0, 0}, {2, 0, 0}, cube), std::invalid_argument);
}

TEST_CASE("BVH agrees with exhaustive scan on 1000 random rays") {
  TriangleMesh scene = make_icosphere(0.7, 3);
  {
    const TriangleMesh box = make_box({0.25, 0.3, 0.35}, {0.9, 0.2, -0.4});
    const int base = (int)scene.vertices.size();
    scene.vertices.insert(scene.vertices.end(), box.vertices.begin(), box.vertices.end());
    for (auto t : box.triangles) scene.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  const Bvh bvh(scene);
  Rng rng(42);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 o{u(rng), u(rng), u(rng)};
    Vec3 d{u(rng), u(rng), u(rng)};
    if (norm(d) < 1e-6) d = {1, 0, 0};
    d = normalized(d);
    const auto got = bvh.intersect(o, d);
    const auto want = brute_force_intersect(o, d, scene);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      ++hits;
      CHECK(std::abs(got->t - want->t) < 1e-9);
      CHECK(got->triangle == want->triangle);
    }
  }
  CHECK(hits > 50);  // the scene is actually being hit
}
