#include <catch2/catch_amalgamated.hpp>

#include "vhrec/primitives.hpp"
#include "vhrec/uncertainty.hpp"

using namespace vhrec;

namespace {

DecoderArch tiny_arch() {
  DecoderArch a;
  a.layers = 3;
  a.hidden = 16;
  a.skip_layer = 1;
  a.latent_dim = 4;
  return a;
}

// variance lattice helpers
VoxelGrid empty_grid(int res = 20) {
  return VoxelGrid({-1.1, -1.1, -1.1}, 2.2 / res, {res, res, res});
}

}  // namespace

TEST_CASE("sample_shapes reconstructs one grid per code") {
  const DecoderArch arch = tiny_arch();
  const DecoderState<double> st = DecoderState<double>::geometric_init(arch, 9);
  std::vector<std::vector<double>> codes(3, std::vector<double>(arch.latent_dim, 0.0));
  SampleShapesOptions opts;
  opts.grid_resolution = 24;
  opts.mesh.resolution = 24;
  const ShapeSampleSet set = sample_shapes(codes, st, opts);
  REQUIRE(set.grids.size() == codes.size());
  REQUIRE(set.meshes.size() == codes.size());

  SECTION("identical codes give identical grids") {
    CHECK(set.grids[0].values == set.grids[1].values);
    CHECK(set.grids[1].values == set.grids[2].values);
  }
  SECTION("grids match an independent voxelize of each mesh") {
    for (size_t s = 0; s < set.meshes.size(); ++s) {
      const VoxelGrid direct = voxelize(set.meshes[s], opts.bbox, opts.grid_resolution, false);
      CHECK(direct.values == set.grids[s].values);
    }
  }
  SECTION("fewer than 2 codes is rejected") {
    std::vector<std::vector<double>> one(1, std::vector<double>(arch.latent_dim, 0.0));
    CHECK_THROWS_AS(sample_shapes(one, st, opts), std::invalid_argument);
  }
}

TEST_CASE("uniform-sign code yields an all-zero flagged grid") {
  const DecoderArch arch = tiny_arch();
  DecoderState<double> st = DecoderState<double>::zeros(arch);
  st.biases.back()[0] = 1.0;  // f = +1 everywhere
  std::vector<std::vector<double>> codes(2, std::vector<double>(arch.latent_dim, 0.0));
  SampleShapesOptions opts;
  opts.grid_resolution = 16;
  opts.mesh.resolution = 16;
  opts.mesh.sparse = false;
  const ShapeSampleSet set = sample_shapes(codes, st, opts);
  CHECK(set.uniform_sign[0]);
  CHECK(set.grids[0].count_occupied() == 0);
}

TEST_CASE("voxel_variance is the binary population variance") {
  ShapeSampleSet set;
  for (int s = 0; s < 4; ++s) set.grids.push_back(empty_grid(4));
  // voxel 0: occupancies 1,1,0,0 -> p=0.5 -> 0.25
  set.grids[0].values[0] = 1;
  set.grids[1].values[0] = 1;
  // voxel 1: occupancies 1,0,0,0 -> p=0.25 -> 0.1875
  set.grids[2].values[1] = 1;
  const VoxelGrid var = voxel_variance(set);
  CHECK(var.values[0] == 0.25);
  CHECK(var.values[1] == Catch::Approx(0.1875));
  CHECK(var.values[2] == 0.0);

  SECTION("identical samples give zero variance") {
    ShapeSampleSet same;
    for (int s = 0; s < 3; ++s) {
      same.grids.push_back(empty_grid(4));
      same.grids.back().values[7] = 1;
    }
    const VoxelGrid v = voxel_variance(same);
    for (double x : v.values) CHECK(x == 0.0);
  }
}

TEST_CASE("voxel_variance matches the direct formula on random samples") {
  Rng rng(33);
  std::bernoulli_distribution flip(0.4);
  ShapeSampleSet set;
  const int S = 5;
  for (int s = 0; s < S; ++s) {
    set.grids.push_back(empty_grid(6));
    for (double& v : set.grids.back().values) v = flip(rng) ? 1.0 : 0.0;
  }
  const VoxelGrid var = voxel_variance(set);
  double vmax = 0;
  for (size_t i = 0; i < var.values.size(); ++i) {
    double mean = 0;
    for (int s = 0; s < S; ++s) mean += set.grids[s].values[i];
    mean /= S;
    double want = 0;
    for (int s = 0; s < S; ++s) want += std::pow(set.grids[s].values[i] - mean, 2);
    want /= S;
    CHECK(std::abs(var.values[i] - want) <= 1e-12);
    vmax = std::max(vmax, var.values[i]);
  }
  CHECK(vmax <= 0.25);
}

TEST_CASE("select_touch picks the flatter of two equal-variance clusters") {
  // mean mesh: a box; one candidate cluster sits against the flat +x face,
  // the other at a corner where the plane fit is poor
  const TriangleMesh box = make_box({0.6, 0.6, 0.6});
  VoxelGrid var = empty_grid(22);

  auto voxel_at = [&](const Vec3& p) {
    const int ix = (int)((p.x - var.origin.x) / var.voxel_edge);
    const int iy = (int)((p.y - var.origin.y) / var.voxel_edge);
    const int iz = (int)((p.z - var.origin.z) / var.voxel_edge);
    return var.index(ix, iy, iz);
  };
  // flat cluster: a patch on the +x face center
  std::vector<int> flat_cluster;
  for (double dy : {-0.05, 0.05})
    for (double dz : {-0.05, 0.05}) flat_cluster.push_back(voxel_at({0.6, dy, dz}));
  // corner cluster: around the (+,+,+) corner
  std::vector<int> corner_cluster;
  for (double d : {-0.02, 0.06}) corner_cluster.push_back(voxel_at({0.6 + d, 0.6 - d, 0.6}));
  for (int v : flat_cluster) var.values[v] = 0.25;
  for (int v : corner_cluster) var.values[v] = 0.25;

  SelectTouchOptions opts;
  opts.seed = 5;
  const TouchTarget t = select_touch(var, box, opts);
  CHECK_FALSE(t.fallback);
  const bool in_flat =
      std::find(flat_cluster.begin(), flat_cluster.end(), t.voxel) != flat_cluster.end();
  CHECK(in_flat);
  CHECK(std::abs(t.position.x - 0.6) < 0.08);  // projected onto the +x face
  CHECK(dot(t.approach, Vec3{-1, 0, 0}) > 0.9);  // approaches against +x normal

  SECTION("scale invariance of the selection") {
    VoxelGrid scaled = var;
    for (double& v : scaled.values) v *= 0.37;
    const TouchTarget t2 = select_touch(scaled, box, opts);
    CHECK(t2.voxel == t.voxel);
  }
}

TEST_CASE("single maximal voxel wins") {
  const TriangleMesh sphere = make_icosphere(0.8, 3);
  VoxelGrid var = empty_grid(20);
  // put the lone max near the surface at +z pole
  const int ix = 10, iy = 10, iz = 18;
  var.values[var.index(ix, iy, iz)] = 0.2;
  var.values[var.index(2, 2, 2)] = 0.1;  // below the band
  SelectTouchOptions opts;
  const TouchTarget t = select_touch(var, sphere, opts);
  CHECK(t.voxel == var.index(ix, iy, iz));
  CHECK_FALSE(t.fallback);
  CHECK(std::abs(norm(t.position) - 0.8) < 0.1);
}

TEST_CASE("all-zero variance falls back to a random surface voxel") {
  const TriangleMesh sphere = make_icosphere(0.8, 3);
  const VoxelGrid var = empty_grid(20);
  SelectTouchOptions opts;
  opts.seed = 12;
  const TouchTarget t = select_touch(var, sphere, opts);
  CHECK(t.fallback);
  // returned voxel lies on the occupancy surface shell
  const VoxelGrid occ = voxelize(sphere, var.bbox(), var.dims[0], false);
  const std::vector<int> shell = surface_shell(occ);
  CHECK(std::find(shell.begin(), shell.end(), t.voxel) != shell.end());
}

TEST_CASE("negative variance is rejected") {
  VoxelGrid var = empty_grid(4);
  var.values[3] = -0.1;
  CHECK_THROWS_AS(select_touch(var, make_box({0.5, 0.5, 0.5}), {}), std::invalid_argument);
}

TEST_CASE("masking removes a cluster from consideration") {
  const TriangleMesh box = make_box({0.6, 0.6, 0.6});
  VoxelGrid var = empty_grid(22);
  const int a = var.index(11, 11, 20);  // near +z face
  const int b = var.index(20, 11, 11);  // near +x face
  var.values[a] = 0.25;
  var.values[b] = 0.25;
  SelectTouchOptions opts;
  const TouchTarget first = select_touch(var, box, opts);
  std::vector<char> mask(var.cell_count(), 0);
  mask[first.voxel] = 1;
  const TouchTarget second = select_touch(var, box, opts, &mask);
  CHECK(second.voxel != first.voxel);
  CHECK((second.voxel == a || second.voxel == b));
}
