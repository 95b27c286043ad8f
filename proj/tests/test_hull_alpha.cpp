#include <catch2/catch_amalgamated.hpp>

#include "vhrec/alpha_shape.hpp"
#include "vhrec/hull.hpp"
#include "vhrec/metrics.hpp"
#include "vhrec/primitives.hpp"
#include "vhrec/sampling.hpp"

using namespace vhrec;

namespace {

std::vector<Vec3> cube_corners() {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back({i & 1 ? 1.0 : -1.0, i & 2 ? 1.0 : -1.0, i & 4 ? 1.0 : -1.0});
  return pts;
}

std::vector<Vec3> random_points(Rng& rng, int n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  return pts;
}

}  // namespace

TEST_CASE("hull of cube corners has 8 vertices and volume 8") {
  const TriangleMesh hull = convex_hull(cube_corners());
  CHECK(hull.vertices.size() == 8);
  CHECK(hull.is_watertight());
  CHECK(hull.signed_volume() == Catch::Approx(8.0));
}

TEST_CASE("interior points do not change the hull") {
  auto pts = cube_corners();
  const TriangleMesh base = convex_hull(pts);
  Rng rng(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 50; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  const TriangleMesh with_interior = convex_hull(pts);
  CHECK(with_interior.vertices.size() == 8);
  CHECK(with_interior.signed_volume() == Catch::Approx(base.signed_volume()));
}

TEST_CASE("every input point lies inside all hull facet half-spaces") {
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const auto pts = random_points(rng, 200);
    const TriangleMesh hull = convex_hull(pts);
    REQUIRE(hull.is_watertight());
    CHECK(hull.signed_volume() > 0);
    for (int t = 0; t < (int)hull.triangles.size(); ++t) {
      const Vec3 n = hull.face_normal(t);
      const double offset = dot(n, hull.vertices[hull.triangles[t][0]]);
      for (const Vec3& p : pts) CHECK(dot(n, p) - offset <= 1e-9);
    }
  }
}

TEST_CASE("degenerate hull inputs are rejected") {
  CHECK_THROWS_AS(convex_hull(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}),
                  std::invalid_argument);
  // coplanar
  std::vector<Vec3> plane;
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 30; ++i) plane.push_back({u(rng), u(rng), 0.0});
  CHECK_THROWS_AS(convex_hull(plane), std::invalid_argument);
  // collinear
  std::vector<Vec3> line;
  for (int i = 0; i < 10; ++i) line.push_back({(double)i, 2.0 * i, -i * 1.0});
  CHECK_THROWS_AS(convex_hull(line), std::invalid_argument);
}

TEST_CASE("alpha shape with huge alpha matches the hull volume") {
  Rng rng(23);
  const auto pts = random_points(rng, 120);
  const TriangleMesh hull = convex_hull(pts);
  const TriangleMesh alpha = alpha_shape(pts, 1e9);
  CHECK(alpha.is_watertight());
  CHECK(std::abs(alpha.signed_volume() - hull.signed_volume()) <=
        1e-9 * std::abs(hull.signed_volume()));
}

TEST_CASE("alpha below the point spacing gives an empty mesh") {
  // grid of points spaced 0.5 apart; any tet circumradius >= 0.25
  std::vector<Vec3> pts;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) pts.push_back({0.5 * i, 0.5 * j, 0.5 * k});
  const TriangleMesh mesh = alpha_shape(pts, 0.1);
  CHECK(mesh.empty());
}

TEST_CASE("alpha complex volume never exceeds the hull volume") {
  Rng rng(31);
  for (double alpha : {0.3, 0.6, 1.2}) {
    const auto pts = random_points(rng, 150);
    const TriangleMesh hull = convex_hull(pts);
    const TriangleMesh shape = alpha_shape(pts, alpha);
    if (shape.empty()) continue;
    CHECK(shape.signed_volume() <= hull.signed_volume() + 1e-9);
  }
}

TEST_CASE("alpha shape of a dense sphere cloud tracks the sphere", "[slow]") {
  const TriangleMesh sphere = make_icosphere(1.0, 4);
  const PointCloud cloud = sample_surface(sphere, 5000, uint64_t(7));
  const TriangleMesh shape = alpha_shape(cloud.points, 0.3);
  REQUIRE_FALSE(shape.empty());
  const PointCloud shape_samples = sample_surface(shape, 5000, uint64_t(8));
  const PointCloud sphere_samples = sample_surface(sphere, 5000, uint64_t(9));
  CHECK(chamfer_distance(shape_samples, sphere_samples) <= 0.05);
}

TEST_CASE("alpha shape rejects bad arguments") {
  CHECK_THROWS_AS(alpha_shape(std::vector<Vec3>{{0, 0, 0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(alpha_shape(cube_corners(), 0.0), std::invalid_argument);
}
