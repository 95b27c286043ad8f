#include <catch2/catch_amalgamated.hpp>

#include "vhrec/metrics.hpp"

using namespace vhrec;

namespace {

PointCloud random_cloud(Rng& rng, int n, double lo = -1, double hi = 1) {
  PointCloud c;
  std::uniform_real_distribution<double> u(lo, hi);
  for (int i = 0; i < n; ++i) c.add({u(rng), u(rng), u(rng)}, PointSource::Visual);
  return c;
}

double chamfer_brute_force(const PointCloud& a, const PointCloud& b) {
  auto directed = [](const PointCloud& from, const PointCloud& to) {
    double sum = 0;
    for (const Vec3& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to.points) best = std::min(best, norm(p - q));
      sum += best;
    }
    return sum / (double)from.size();
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

}  // namespace

TEST_CASE("chamfer of identical clouds is zero") {
  Rng rng(1);
  const PointCloud c = random_cloud(rng, 50);
  CHECK(chamfer_distance(c, c) == 0.0);
}

TEST_CASE("chamfer of two single points is their distance") {
  PointCloud a, b;
  a.add({0, 0, 0}, PointSource::Visual);
  b.add({0, 3, 4}, PointSource::Visual);
  CHECK(chamfer_distance(a, b) == Catch::Approx(5.0));
}

TEST_CASE("chamfer matches exhaustive oracle on random clouds") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const PointCloud a = random_cloud(rng, 200);
    const PointCloud b = random_cloud(rng, 180);
    const double fast = chamfer_distance(a, b);
    const double slow = chamfer_brute_force(a, b);
    CHECK(std::abs(fast - slow) <= 1e-12);
    CHECK(chamfer_distance(b, a) == fast);  // symmetry
  }
}

TEST_CASE("chamfer rejects empty clouds") {
  PointCloud a, empty;
  a.add({0, 0, 0}, PointSource::Visual);
  CHECK_THROWS_AS(chamfer_distance(a, empty), std::invalid_argument);
  CHECK_THROWS_AS(chamfer_distance(empty, a), std::invalid_argument);
}

TEST_CASE("jaccard basics") {
  VoxelGrid a({0, 0, 0}, 0.1, {4, 4, 4});
  VoxelGrid b = a;
  a.values[3] = a.values[17] = 1;
  b.values[3] = b.values[17] = 1;
  CHECK(jaccard_similarity(a, b) == 1.0);

  b.values[17] = 0;
  b.values[20] = 1;  // disjoint part
  CHECK(jaccard_similarity(a, b) == Catch::Approx(1.0 / 3.0));

  VoxelGrid empty1({0, 0, 0}, 0.1, {4, 4, 4});
  VoxelGrid empty2 = empty1;
  CHECK(jaccard_similarity(empty1, empty2) == 1.0);

  VoxelGrid disjoint = empty1;
  disjoint.values[40] = 1;
  CHECK(jaccard_similarity(a, disjoint) == 0.0);
}

TEST_CASE("jaccard rejects mismatched lattices") {
  VoxelGrid a({0, 0, 0}, 0.1, {4, 4, 4});
  VoxelGrid b({0, 0, 0}, 0.1, {4, 4, 5});
  CHECK_THROWS_AS(jaccard_similarity(a, b), std::invalid_argument);
  VoxelGrid c({0.01, 0, 0}, 0.1, {4, 4, 4});
  CHECK_THROWS_AS(jaccard_similarity(a, c), std::invalid_argument);
}

TEST_CASE("jaccard matches counting oracle on random grids") {
  Rng rng(3);
  std::bernoulli_distribution flip(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    VoxelGrid a({0, 0, 0}, 0.2, {10, 10, 10});
    VoxelGrid b = a;
    for (size_t i = 0; i < a.values.size(); ++i) {
      a.values[i] = flip(rng) ? 1.0 : 0.0;
      b.values[i] = flip(rng) ? 1.0 : 0.0;
    }
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
      if (a.values[i] == 1 && b.values[i] == 1) ++inter;
      if (a.values[i] == 1 || b.values[i] == 1) ++uni;
    }
    const double want = uni == 0 ? 1.0 : (double)inter / (double)uni;
    CHECK(jaccard_similarity(a, b) == want);
    CHECK(jaccard_similarity(b, a) == want);
  }
}
