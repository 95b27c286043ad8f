// Command-line front end: corpus generation, decoder training, single
// active-completion runs, the benchmark matrix, and mesh metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "vhrec/suite.hpp"

using namespace vhrec;

namespace {

DecoderArch arch_by_name(const std::string& name) {
  DecoderArch arch;  // desk scale: 8 x 128, latent 64
  if (name == "desk") return arch;
  if (name == "paper") {
    arch.hidden = 512;
    arch.latent_dim = 256;
    return arch;
  }
  throw CLI::ValidationError("--arch must be desk or paper");
}

void apply_run_json(const nlohmann::json& j, RunConfig& cfg) {
  cfg.scene_file = j.value("scene", cfg.scene_file);
  cfg.checkpoint_file = j.value("checkpoint", cfg.checkpoint_file);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.policy = j.value("policy", cfg.policy);
  cfg.reconstructor = j.value("reconstructor", cfg.reconstructor);
  cfg.touches = j.value("touches", cfg.touches);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.store_every = j.value("store_every", cfg.store_every);
  cfg.samples = j.value("samples", cfg.samples);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.run_id = j.value("run_id", cfg.run_id);
  cfg.object_id = j.value("object_id", cfg.object_id);
  cfg.grid_resolution = j.value("grid_resolution", cfg.grid_resolution);
  cfg.mesh_resolution = j.value("mesh_resolution", cfg.mesh_resolution);
  cfg.metric_samples = j.value("metric_samples", cfg.metric_samples);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.baseline_max_points = j.value("baseline_max_points", cfg.baseline_max_points);
  cfg.precision = j.value("precision", cfg.precision);
  cfg.latent_alpha = j.value("latent_alpha", cfg.latent_alpha);
  cfg.max_attempts = j.value("max_attempts", cfg.max_attempts);
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    cfg.loss.lambda = l.value("lambda", cfg.loss.lambda);
    cfg.loss.tau = l.value("tau", cfg.loss.tau);
    cfg.loss.gamma = l.value("gamma", cfg.loss.gamma);
    cfg.loss.data_batch = l.value("data_batch", cfg.loss.data_batch);
    cfg.loss.eikonal_batch = l.value("eikonal_batch", cfg.loss.eikonal_batch);
  }
  if (j.contains("gpis")) {
    const auto& g = j["gpis"];
    cfg.gpis.sigma_f = g.value("sigma_f", cfg.gpis.sigma_f);
    cfg.gpis.ell = g.value("ell", cfg.gpis.ell);
    cfg.gpis.sigma_n = g.value("sigma_n", cfg.gpis.sigma_n);
    cfg.gpis.offset = g.value("offset", cfg.gpis.offset);
    cfg.gpis.max_surface_points = g.value("max_surface_points", cfg.gpis.max_surface_points);
  }
  if (j.contains("contact_normals"))
    cfg.contact_normals = j["contact_normals"] == "approach" ? ContactNormalMode::Approach
                                                             : ContactNormalMode::GroundTruth;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"active visuo-haptic shape reconstruction"};
  app.require_subcommand(1);

  // ---- corpus ----
  auto* corpus_cmd = app.add_subcommand("corpus", "generate a procedural training corpus");
  CorpusConfig corpus_cfg;
  corpus_cmd->add_option("--out", corpus_cfg.out_dir, "output directory")->required();
  corpus_cmd->add_option("--shapes", corpus_cfg.shapes, "number of base shapes");
  corpus_cmd->add_option("--rotations", corpus_cfg.rotations, "views per shape");
  corpus_cmd->add_option("--points", corpus_cfg.points_per_cloud, "samples per cloud");
  corpus_cmd->add_option("--seed", corpus_cfg.seed, "rng seed");
  corpus_cmd->add_option("--families", corpus_cfg.families, "shape families to cycle");

  // ---- train ----
  auto* train_cmd_app = app.add_subcommand("train", "train the multi-shape decoder");
  TrainCommandConfig train_cfg;
  std::string arch_name = "desk";
  train_cmd_app->add_option("--corpus", train_cfg.corpus_dir, "corpus directory")->required();
  train_cmd_app->add_option("--out", train_cfg.checkpoint_out, "checkpoint path")->required();
  train_cmd_app->add_option("--loss-csv", train_cfg.loss_csv, "loss trace CSV path");
  train_cmd_app->add_option("--iterations", train_cfg.train.iterations, "training iterations");
  train_cmd_app->add_option("--batch-shapes", train_cfg.train.batch_shapes, "shapes per batch");
  train_cmd_app->add_option("--arch", arch_name, "desk or paper");
  train_cmd_app->add_option("--seed", train_cfg.train.seed, "rng seed");
  train_cmd_app->add_option("--threads", train_cfg.train.threads, "shape-batch threads");
  train_cmd_app->add_option("--precision", train_cfg.precision, "float32 or float64");

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "one active completion run");
  RunConfig run_cfg;
  std::string run_config_path;
  run_cmd->add_option("--config", run_config_path, "run config JSON");
  run_cmd->add_option("--scene", run_cfg.scene_file, "scene JSON");
  run_cmd->add_option("--checkpoint", run_cfg.checkpoint_file, "decoder checkpoint");
  run_cmd->add_option("--out", run_cfg.out_dir, "output directory");
  run_cmd->add_option("--policy", run_cfg.policy, "uncertainty | random | gpis");
  run_cmd->add_option("--reconstructor", run_cfg.reconstructor, "igr | hull | alpha | gpis");
  run_cmd->add_option("--touches", run_cfg.touches, "number of touches M");
  run_cmd->add_option("--steps", run_cfg.steps, "latent descent steps G");
  run_cmd->add_option("--interval", run_cfg.store_every, "code store interval L");
  run_cmd->add_option("--samples", run_cfg.samples, "shape samples S");
  run_cmd->add_option("--seed", run_cfg.seed, "rng seed");
  run_cmd->add_option("--precision", run_cfg.precision, "float32 or float64");

  // ---- bench ----
  auto* bench_cmd = app.add_subcommand("bench", "benchmark matrix");
  std::string bench_config_path;
  int bench_threads = 1;
  bench_cmd->add_option("--config", bench_config_path, "bench config JSON")->required();
  bench_cmd->add_option("--threads", bench_threads, "concurrent cells");

  // ---- metrics ----
  auto* metrics_cmd = app.add_subcommand("metrics", "chamfer and jaccard between two meshes");
  std::string recon_path, truth_path;
  int metric_samples = 10000, metric_res = 40;
  uint64_t metric_seed = 0;
  metrics_cmd->add_option("--recon", recon_path, "reconstruction mesh (OBJ/STL)")->required();
  metrics_cmd->add_option("--truth", truth_path, "ground truth mesh (OBJ/STL)")->required();
  metrics_cmd->add_option("--samples", metric_samples, "chamfer sample count");
  metrics_cmd->add_option("--grid-res", metric_res, "jaccard lattice resolution");
  metrics_cmd->add_option("--seed", metric_seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corpus_cmd) {
      const auto entries = build_corpus(corpus_cfg);
      std::cout << "corpus: " << entries.size() << " samples in " << corpus_cfg.out_dir << "\n";
      return 0;
    }
    if (*train_cmd_app) {
      train_cfg.train.arch = arch_by_name(arch_name);
      const auto trace = train_command(train_cfg);
      std::cout << "trained " << trace.size() << " iterations; final loss "
                << (trace.empty() ? 0.0 : trace.back().total) << "\n"
                << "checkpoint: " << train_cfg.checkpoint_out << "\n";
      return 0;
    }
    if (*run_cmd) {
      if (!run_config_path.empty()) apply_run_json(load_json(run_config_path), run_cfg);
      if (run_cfg.scene_file.empty() || run_cfg.out_dir.empty())
        throw std::runtime_error("run: --scene and --out (or --config) are required");
      const RunResult result = run_active_completion(run_cfg);
      for (const StepReport& row : result.steps)
        std::cout << "t=" << row.t << " chamfer=" << row.chamfer << " jaccard=" << row.jaccard
                  << " outcome=" << row.outcome << "\n";
      std::cout << "artifacts: " << run_cfg.out_dir << "\n";
      return 0;
    }
    if (*bench_cmd) {
      const nlohmann::json j = load_json(bench_config_path);
      SuiteConfig suite;
      suite.scenes = j.at("scenes").get<std::vector<std::string>>();
      if (j.contains("reconstructors"))
        suite.reconstructors = j["reconstructors"].get<std::vector<std::string>>();
      if (j.contains("policies"))
        suite.policies = j["policies"].get<std::vector<std::string>>();
      suite.repetitions = j.value("repetitions", suite.repetitions);
      suite.base_seed = j.value("base_seed", suite.base_seed);
      suite.out_dir = j.at("out_dir");
      suite.checkpoint_file = j.value("checkpoint", suite.checkpoint_file);
      suite.threads = bench_threads;
      if (j.contains("run")) apply_run_json(j["run"], suite.run);
      const BenchResult result = run_benchmark(suite);
      size_t done = 0;
      for (const CellStatus& c : result.cells) {
        if (c.completed) ++done;
        else std::cerr << "cell failed: " << c.cell_id << ": " << c.error << "\n";
      }
      std::cout << "cells completed: " << done << "/" << result.cells.size() << "\n"
                << "aggregate: " << result.aggregate_csv_path << "\n";
      return result.all_completed ? 0 : 1;
    }
    if (*metrics_cmd) {
      auto load_mesh = [](const std::string& p) {
        return p.size() >= 4 && p.substr(p.size() - 4) == ".stl" ? read_stl(p) : read_obj(p);
      };
      const TriangleMesh recon = load_mesh(recon_path);
      const TriangleMesh truth = load_mesh(truth_path);
      const PointCloud a = sample_surface(recon, metric_samples, metric_seed);
      const PointCloud b = sample_surface(truth, metric_samples, metric_seed + 1);
      const Aabb bbox{{-1.1, -1.1, -1.1}, {1.1, 1.1, 1.1}};
      const double chamfer = chamfer_distance(a, b);
      const double jaccard =
          jaccard_similarity(voxelize(recon, bbox, metric_res, false),
                             voxelize(truth, bbox, metric_res, false));
      std::cout << "chamfer," << chamfer << "\njaccard," << jaccard << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
