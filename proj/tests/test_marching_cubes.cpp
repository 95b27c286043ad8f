#include <catch2/catch_amalgamated.hpp>

#include "vhrec/marching_cubes.hpp"
#include "vhrec/voxelize.hpp"

using namespace vhrec;

TEST_CASE("linear field gives planar vertices") {
  const auto mesh = marching_cubes([](const Vec3& p) { return p.z; }, {{-1, -1, -1}, {1, 1, 1}}, 32);
  REQUIRE_FALSE(mesh.empty());
  for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.z) <= 1e-6);
}

TEST_CASE("uniform-sign field gives empty mesh") {
  const auto mesh = marching_cubes([](const Vec3&) { return 1.0; }, {{-1, -1, -1}, {1, 1, 1}}, 8);
  CHECK(mesh.empty());
}

TEST_CASE("sphere SDF vertices lie near the analytic radius") {
  const int res = 64;
  const Aabb bbox{{-1, -1, -1}, {1, 1, 1}};
  const auto mesh =
      marching_cubes([](const Vec3& p) { return norm(p) - 0.5; }, bbox, res);
  REQUIRE_FALSE(mesh.empty());
  const double cell = 2.0 / res;
  for (const Vec3& v : mesh.vertices) CHECK(std::abs(norm(v) - 0.5) <= 2 * cell);

  SECTION("closed and outward-oriented") {
    CHECK(mesh.is_watertight());
    CHECK(mesh.signed_volume() > 0);
    CHECK(mesh.signed_volume() == Catch::Approx(4.0 / 3 * M_PI * 0.125).epsilon(0.05));
  }
}

TEST_CASE("level-set scale invariance: f and 2f give identical vertices") {
  const Aabb bbox{{-1, -1, -1}, {1, 1, 1}};
  auto f = [](const Vec3& p) { return norm(p) - 0.6; };
  const auto m1 = marching_cubes(f, bbox, 24);
  const auto m2 = marching_cubes([&](const Vec3& p) { return 2.0 * f(p); }, bbox, 24);
  REQUIRE(m1.vertices.size() == m2.vertices.size());
  for (size_t i = 0; i < m1.vertices.size(); ++i) CHECK(m1.vertices[i] == m2.vertices[i]);
  CHECK(m1.triangles == m2.triangles);
}

TEST_CASE("close_boundary caps a surface leaving the box") {
  const Aabb bbox{{-1, -1, -1}, {1, 1, 1}};
  auto f = [](const Vec3& p) { return norm(p) - 2.0; };  // sphere contains the whole box
  MarchingCubesOptions opts;
  opts.close_boundary = true;
  const auto capped = marching_cubes(f, bbox, 16, opts);
  REQUIRE_FALSE(capped.empty());
  CHECK(capped.is_watertight());

  const auto open = marching_cubes(f, bbox, 16);
  CHECK(open.empty());  // the whole box is inside, no crossing without the cap
}

TEST_CASE("resolution below 2 is rejected") {
  CHECK_THROWS_AS(marching_cubes([](const Vec3&) { return 1.0; }, {{-1, -1, -1}, {1, 1, 1}}, 1),
                  std::invalid_argument);
}

TEST_CASE("marching cubes then voxelize matches field-sign occupancy") {
  const Aabb bbox{{-1.1, -1.1, -1.1}, {1.1, 1.1, 1.1}};
  auto f = [](const Vec3& p) {
    return std::min(norm(p - Vec3{0.2, 0, 0}) - 0.55, norm(p + Vec3{0.4, 0, 0}) - 0.35);
  };
  MarchingCubesOptions opts;
  opts.close_boundary = true;
  const auto mesh = marching_cubes(f, bbox, 44, opts);
  REQUIRE(mesh.is_watertight());
  const VoxelGrid grid = voxelize(mesh, bbox, 40);
  size_t mismatches = 0;
  for (int ix = 0; ix < 40; ++ix)
    for (int iy = 0; iy < 40; ++iy)
      for (int iz = 0; iz < 40; ++iz) {
        const bool inside_field = f(grid.center(ix, iy, iz)) < 0;
        const bool occupied = grid.values[grid.index(ix, iy, iz)] != 0;
        if (inside_field != occupied) ++mismatches;
      }
  // only centers within a cell of the surface may disagree with the exact sign
  CHECK(mismatches < 500);
}
