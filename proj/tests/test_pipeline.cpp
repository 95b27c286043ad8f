#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "vhrec/suite.hpp"

using namespace vhrec;
namespace fs = std::filesystem;

namespace {

struct TestWorld {
  std::string dir;
  std::string checkpoint;
  std::vector<CorpusEntry> entries;
};

// small corpus plus a quickly trained checkpoint, built once per process
const TestWorld& test_world() {
  static const TestWorld world = [] {
    TestWorld w;
    w.dir = "/tmp/vhrec_pipeline_test";
    fs::remove_all(w.dir);
    CorpusConfig cc;
    cc.out_dir = w.dir + "/corpus";
    cc.shapes = 4;
    cc.rotations = 2;
    cc.points_per_cloud = 1200;
    cc.seed = 5;
    w.entries = build_corpus(cc);

    TrainCommandConfig tc;
    tc.corpus_dir = cc.out_dir;
    tc.checkpoint_out = w.dir + "/model.bin";
    tc.train.arch.layers = 4;
    tc.train.arch.hidden = 32;
    tc.train.arch.skip_layer = 2;
    tc.train.arch.latent_dim = 8;
    tc.train.iterations = 250;
    tc.train.batch_shapes = 4;
    tc.train.loss.data_batch = 64;
    tc.train.loss.eikonal_batch = 64;
    tc.train.seed = 11;
    train_command(tc);
    w.checkpoint = tc.checkpoint_out;
    return w;
  }();
  return world;
}

RunConfig small_run_config(const std::string& out_dir) {
  const TestWorld& w = test_world();
  RunConfig cfg;
  cfg.scene_file = w.entries.front().scene_path;
  cfg.checkpoint_file = w.checkpoint;
  cfg.out_dir = out_dir;
  cfg.touches = 3;
  cfg.steps = 60;
  cfg.store_every = 20;
  cfg.samples = 3;
  cfg.seed = 21;
  cfg.grid_resolution = 24;
  cfg.mesh_resolution = 24;
  cfg.metric_samples = 2000;
  cfg.loss.data_batch = 48;
  cfg.loss.eikonal_batch = 48;
  return cfg;
}

size_t count_hits(const std::vector<StepReport>& steps) {
  size_t n = 0;
  for (const StepReport& s : steps)
    if (s.outcome == "hit" || s.outcome == "fallback") ++n;
  return n;
}

}  // namespace

TEST_CASE("M = 0 degenerates to a single visual-only report", "[slow]") {
  RunConfig cfg = small_run_config("/tmp/vhrec_run_m0");
  cfg.touches = 0;
  const RunResult res = run_active_completion(cfg);
  REQUIRE(res.steps.size() == 1);
  CHECK(res.steps[0].t == 0);
  CHECK(res.steps[0].outcome == "visual");
  CHECK(res.hit_count == 0);
  CHECK(res.final_cloud.count(PointSource::Haptic) == 0);
  CHECK(std::isfinite(res.steps[0].chamfer));
}

TEST_CASE("M touches emit M + 1 reports with increasing t", "[slow]") {
  RunConfig cfg = small_run_config("/tmp/vhrec_run_m3");
  const RunResult res = run_active_completion(cfg);
  REQUIRE(res.steps.size() == (size_t)cfg.touches + 1);
  for (int t = 0; t <= cfg.touches; ++t) CHECK(res.steps[t].t == t);
  CHECK(res.steps[0].outcome == "visual");

  SECTION("haptic points equal hit outcomes") {
    CHECK(res.final_cloud.count(PointSource::Haptic) == res.hit_count);
    CHECK(count_hits(res.steps) == res.hit_count);
  }
  SECTION("artifacts exist") {
    for (int t = 0; t <= cfg.touches; ++t) {
      CHECK(fs::exists(cfg.out_dir + "/recon_t" + std::to_string(t) + ".obj"));
      CHECK(fs::exists(cfg.out_dir + "/cloud_t" + std::to_string(t) + ".ply"));
    }
    CHECK(fs::exists(cfg.out_dir + "/steps.csv"));
    CHECK(fs::exists(cfg.out_dir + "/run.log.jsonl"));
  }
}

TEST_CASE("rerun with identical config and seed reproduces the CSV", "[slow]") {
  // wall-clock seconds vary run to run; every metric column must not
  auto metrics_only = [](const std::string& path) {
    std::ifstream in(path);
    std::string line, out;
    while (std::getline(in, line)) {
      const auto last_comma = line.rfind(',');
      const auto second_last = line.rfind(',', last_comma - 1);
      out += line.substr(0, second_last) + line.substr(last_comma) + '\n';
    }
    return out;
  };
  RunConfig cfg = small_run_config("/tmp/vhrec_run_det1");
  run_active_completion(cfg);
  cfg.out_dir = "/tmp/vhrec_run_det2";
  run_active_completion(cfg);
  CHECK(metrics_only("/tmp/vhrec_run_det1/steps.csv") ==
        metrics_only("/tmp/vhrec_run_det2/steps.csv"));
}

TEST_CASE("baseline reconstructor with uncertainty-driven touches", "[slow]") {
  RunConfig cfg = small_run_config("/tmp/vhrec_run_hull");
  cfg.reconstructor = "hull";
  cfg.policy = "uncertainty";
  const RunResult res = run_active_completion(cfg);
  REQUIRE(res.steps.size() == (size_t)cfg.touches + 1);
  for (const StepReport& s : res.steps) CHECK(std::isfinite(s.chamfer));
}

TEST_CASE("random and gpis policies run without a checkpoint when allowed", "[slow]") {
  RunConfig cfg = small_run_config("/tmp/vhrec_run_nochk");
  cfg.reconstructor = "hull";
  cfg.policy = "random";
  cfg.checkpoint_file.clear();
  const RunResult res = run_active_completion(cfg);
  REQUIRE(res.steps.size() == (size_t)cfg.touches + 1);

  cfg.policy = "gpis";
  cfg.reconstructor = "gpis";
  cfg.out_dir = "/tmp/vhrec_run_gpispol";
  const RunResult res2 = run_active_completion(cfg);
  REQUIRE(res2.steps.size() == (size_t)cfg.touches + 1);
}

TEST_CASE("config validation", "[slow]") {
  RunConfig cfg = small_run_config("/tmp/vhrec_run_bad");
  SECTION("missing checkpoint for igr") {
    cfg.checkpoint_file.clear();
    CHECK_THROWS_AS(run_active_completion(cfg), std::invalid_argument);
  }
  SECTION("bad policy name") {
    cfg.policy = "psychic";
    CHECK_THROWS_AS(run_active_completion(cfg), std::invalid_argument);
  }
  SECTION("L > G") {
    cfg.store_every = cfg.steps + 1;
    CHECK_THROWS_AS(run_active_completion(cfg), std::invalid_argument);
  }
  SECTION("checkpoint file absent") {
    cfg.checkpoint_file = "/tmp/does_not_exist.bin";
    CHECK_THROWS_AS(run_active_completion(cfg), std::invalid_argument);
  }
}

TEST_CASE("benchmark matrix: row count, resume, and aggregation", "[slow]") {
  const TestWorld& w = test_world();
  SuiteConfig suite;
  suite.scenes = {w.entries[0].scene_path, w.entries[2].scene_path};
  suite.reconstructors = {"hull"};
  suite.policies = {"uncertainty", "random"};
  suite.repetitions = 3;
  suite.base_seed = 77;
  suite.out_dir = "/tmp/vhrec_bench";
  suite.checkpoint_file = w.checkpoint;
  suite.run = small_run_config("");
  suite.run.touches = 5;
  suite.run.steps = 40;
  suite.run.store_every = 20;
  suite.run.write_artifacts = true;
  suite.threads = 2;
  fs::remove_all(suite.out_dir);

  const BenchResult result = run_benchmark(suite);
  REQUIRE(result.all_completed);
  size_t rows = 0;
  for (const CellStatus& c : result.cells) rows += c.steps.size();
  CHECK(rows == 2 * 1 * 2 * 3 * 6);  // 72 StepReport rows

  SECTION("resume skips completed cells") {
    const BenchResult again = run_benchmark(suite);
    REQUIRE(again.all_completed);
    for (const CellStatus& c : again.cells) CHECK(c.skipped_resume);
  }

  SECTION("aggregate means match an independent recomputation") {
    // recompute from the raw per-cell CSVs like a spreadsheet would
    std::map<std::tuple<std::string, std::string, int>, std::vector<double>> chamfer;
    for (const auto& dir_entry : fs::directory_iterator(suite.out_dir)) {
      if (!dir_entry.is_directory()) continue;
      std::ifstream in(dir_entry.path() / "steps.csv");
      if (!in) continue;
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        chamfer[{f[2], f[3], std::stoi(f[4])}].push_back(std::stod(f[5]));
      }
    }
    std::ifstream agg(result.aggregate_csv_path);
    std::string line;
    std::getline(agg, line);
    int checked = 0;
    while (std::getline(agg, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::istringstream ls(line);
      std::string tok;
      while (std::getline(ls, tok, ',')) f.push_back(tok);
      const auto key = std::make_tuple(f[0], f[1], std::stoi(f[2]));
      REQUIRE(chamfer.count(key) == 1);
      const auto& xs = chamfer[key];
      double mean = 0;
      for (double x : xs) mean += x;
      mean /= (double)xs.size();
      CHECK(std::stod(f[4]) == Catch::Approx(mean).epsilon(1e-9));
      ++checked;
    }
    CHECK(checked == 12);  // 2 (rec,pol) pairs x 6 t values
  }
}
