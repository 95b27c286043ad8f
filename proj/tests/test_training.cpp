#include <catch2/catch_amalgamated.hpp>

#include "vhrec/checkpoint.hpp"
#include "vhrec/infer.hpp"
#include "vhrec/primitives.hpp"
#include "vhrec/reconstruct.hpp"
#include "vhrec/sampling.hpp"
#include "vhrec/train.hpp"

using namespace vhrec;

namespace {

DecoderArch tiny_arch() {
  DecoderArch a;
  a.layers = 4;
  a.hidden = 32;
  a.skip_layer = 2;
  a.latent_dim = 8;
  a.beta = 100.0;
  return a;
}

TrainConfig tiny_train_config(int iterations) {
  TrainConfig cfg;
  cfg.arch = tiny_arch();
  cfg.iterations = iterations;
  cfg.batch_shapes = 2;
  cfg.loss.data_batch = 64;
  cfg.loss.eikonal_batch = 64;
  cfg.seed = 7;
  return cfg;
}

std::vector<std::pair<PointCloud, std::string>> sphere_box_dataset() {
  std::vector<std::pair<PointCloud, std::string>> data;
  data.emplace_back(sample_surface(make_icosphere(0.8, 3), 1500, uint64_t(1)), "sphere");
  data.emplace_back(sample_surface(make_box({0.6, 0.6, 0.6}), 1500, uint64_t(2)), "box");
  return data;
}

double mean_total(const std::vector<TraceRow>& trace, int from, int to) {
  double sum = 0;
  int n = 0;
  for (const TraceRow& r : trace)
    if (r.iteration >= from && r.iteration <= to) {
      sum += r.total;
      ++n;
    }
  return sum / std::max(1, n);
}

}  // namespace

TEST_CASE("training descends and separates latents", "[slow]") {
  const auto data = sphere_box_dataset();
  const TrainResult<double> result = train_multishape<double>(data, tiny_train_config(300));
  REQUIRE(result.trace.size() == 300);
  const double early = mean_total(result.trace, 1, 20);
  const double late = mean_total(result.trace, 281, 300);
  CHECK(late < early);

  REQUIRE(result.model.latents.size() == 2);
  double sep = 0;
  for (int k = 0; k < tiny_arch().latent_dim; ++k) {
    const double d = result.model.latents[0][k] - result.model.latents[1][k];
    sep += d * d;
  }
  CHECK(std::sqrt(sep) > 0);
}

TEST_CASE("training is bit-deterministic for a fixed seed", "[slow]") {
  const auto data = sphere_box_dataset();
  const TrainConfig cfg = tiny_train_config(40);
  const TrainResult<double> a = train_multishape<double>(data, cfg);
  const TrainResult<double> b = train_multishape<double>(data, cfg);
  REQUIRE(a.model.state.param_count() == b.model.state.param_count());
  for (size_t i = 0; i < a.model.state.param_count(); ++i)
    REQUIRE(a.model.state.param(i) == b.model.state.param(i));
  for (size_t j = 0; j < a.model.latents.size(); ++j)
    for (int k = 0; k < cfg.arch.latent_dim; ++k)
      REQUIRE(a.model.latents[j][k] == b.model.latents[j][k]);
}

TEST_CASE("two-thread training matches single-thread bit-for-bit", "[slow]") {
  const auto data = sphere_box_dataset();
  TrainConfig cfg = tiny_train_config(25);
  const TrainResult<double> a = train_multishape<double>(data, cfg);
  cfg.threads = 2;
  const TrainResult<double> b = train_multishape<double>(data, cfg);
  for (size_t i = 0; i < a.model.state.param_count(); ++i)
    REQUIRE(a.model.state.param(i) == b.model.state.param(i));
}

TEST_CASE("infer_latent bookkeeping") {
  // an untrained model is fine for the arithmetic contracts
  TrainedModel<double> model;
  model.state = DecoderState<double>::geometric_init(tiny_arch(), 3);
  model.latents = {std::vector<double>(tiny_arch().latent_dim, 0.0)};
  model.shape_ids = {"init"};
  const PointCloud cloud = sample_surface(make_icosphere(0.9, 2), 300, uint64_t(5));

  SECTION("G = 100, L = 50 stores exactly 2 codes") {
    InferConfig cfg;
    cfg.steps = 100;
    cfg.store_every = 50;
    cfg.loss.data_batch = 16;
    cfg.loss.eikonal_batch = 16;
    const InferResult<double> res = infer_latent(cloud, model, cfg);
    REQUIRE(res.stored.size() == 2);
    CHECK(res.stored.back() == res.final_code);
  }
  SECTION("G = 160, L = 50 stores floor(G/L) = 3 codes") {
    InferConfig cfg;
    cfg.steps = 160;
    cfg.store_every = 50;
    cfg.loss.data_batch = 16;
    cfg.loss.eikonal_batch = 16;
    const InferResult<double> res = infer_latent(cloud, model, cfg);
    REQUIRE(res.stored.size() == 3);
    CHECK_FALSE(res.stored.back() == res.final_code);  // steps 150..160 move it further
  }
  SECTION("G < L is rejected") {
    InferConfig cfg;
    cfg.steps = 30;
    cfg.store_every = 50;
    CHECK_THROWS_AS(infer_latent(cloud, model, cfg), std::invalid_argument);
  }
  SECTION("warm start is honored") {
    InferConfig cfg;
    cfg.steps = 1;
    cfg.store_every = 1;
    cfg.alpha = 0.0;  // no movement
    cfg.loss.data_batch = 8;
    cfg.loss.eikonal_batch = 8;
    std::vector<double> start(tiny_arch().latent_dim, 0.25);
    const InferResult<double> res = infer_latent(cloud, model, cfg, &start);
    CHECK(res.final_code == start);
  }
}

TEST_CASE("inference reduces the data term on a training shape", "[slow]") {
  const auto data = sphere_box_dataset();
  const TrainResult<double> trained = train_multishape<double>(data, tiny_train_config(800));

  int improved = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud cloud = sample_surface(make_icosphere(0.8, 3), 600, 100 + seed);
    InferConfig cfg;
    cfg.steps = 400;
    cfg.store_every = 50;
    cfg.loss.data_batch = 64;
    cfg.loss.eikonal_batch = 64;
    cfg.seed = seed;
    const InferResult<double> res = infer_latent(cloud, trained.model, cfg);
    if (res.final_terms.data < res.initial_terms.data) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("checkpoint round trip") {
  TrainedModel<double> model;
  model.state = DecoderState<double>::geometric_init(tiny_arch(), 11);
  model.latents = {std::vector<double>(8, 0.5), std::vector<double>(8, -0.25)};
  model.shape_ids = {"a", "b"};
  model.normalized_extent = 2.0;
  model.loss.lambda = 0.17;
  const std::string path = "/tmp/vhrec_test_checkpoint.bin";
  save_checkpoint(model, path);
  const TrainedModel<double> back = load_checkpoint(path);
  REQUIRE(back.state.arch == model.state.arch);
  for (size_t i = 0; i < model.state.param_count(); ++i)
    REQUIRE(back.state.param(i) == model.state.param(i));
  REQUIRE(back.latents == model.latents);
  CHECK(back.shape_ids == model.shape_ids);
  CHECK(back.loss.lambda == 0.17);
}

TEST_CASE("sparse reconstruction equals dense on the init sphere") {
  DecoderArch arch = tiny_arch();
  DecoderState<double> st = DecoderState<double>::geometric_init(arch, 21);
  const std::vector<double> z(arch.latent_dim, 0.0);
  const Aabb bbox{{-1.2, -1.2, -1.2}, {1.2, 1.2, 1.2}};
  ReconstructOptions dense;
  dense.resolution = 36;
  dense.sparse = false;
  ReconstructOptions sparse;
  sparse.resolution = 36;
  sparse.sparse = true;
  const TriangleMesh md = reconstruct_mesh(st, z, bbox, dense);
  const TriangleMesh ms = reconstruct_mesh(st, z, bbox, sparse);
  REQUIRE_FALSE(md.empty());
  REQUIRE(md.vertices.size() == ms.vertices.size());
  for (size_t i = 0; i < md.vertices.size(); ++i) REQUIRE(md.vertices[i] == ms.vertices[i]);
  REQUIRE(md.triangles == ms.triangles);
}

TEST_CASE("divergence raises with the trace attached", "[slow]") {
  auto data = sphere_box_dataset();
  TrainConfig cfg = tiny_train_config(2000);
  cfg.theta_step = 1e6;  // guaranteed blow-up
  try {
    train_multishape<double>(data, cfg);
    FAIL("expected divergence");
  } catch (const TrainDivergence& e) {
    CHECK_FALSE(e.trace.empty());
  }
}
