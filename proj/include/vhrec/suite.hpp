#pragma once

#include <atomic>
#include <thread>

#include "vhrec/pipeline.hpp"
#include "vhrec/train.hpp"

namespace vhrec {

struct SuiteConfig {
  std::vector<std::string> scenes;          // scene JSON paths (objects)
  std::vector<std::string> reconstructors = {"igr"};
  std::vector<std::string> policies = {"uncertainty", "random"};
  int repetitions = 3;
  uint64_t base_seed = 0;
  std::string out_dir;
  std::string checkpoint_file;
  RunConfig run;   // template: touches, steps, lattice, precision, ...
  int threads = 1;
};

struct CellStatus {
  std::string cell_id;
  bool completed = false;
  bool skipped_resume = false;
  std::string error;
  std::vector<StepReport> steps;
};

struct BenchResult {
  std::vector<CellStatus> cells;
  bool all_completed = false;
  std::string aggregate_csv_path;
};

namespace detail {

inline std::string cell_dir_name(const std::string& object_id, const std::string& rec,
                                 const std::string& pol, int rep) {
  return "cell_" + object_id + "_" + rec + "_" + pol + "_r" + std::to_string(rep);
}

inline std::string object_id_from_scene(const std::string& scene_path) {
  const auto stem = std::filesystem::path(scene_path).stem().string();
  return stem.empty() ? scene_path : stem;
}

// a cell resumes as complete when its steps.csv already has M + 1 data rows
inline bool cell_is_complete(const std::string& dir, int touches) {
  const std::string csv = dir + "/steps.csv";
  std::ifstream in(csv);
  if (!in) return false;
  int rows = -1;  // header
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows == touches + 1;
}

inline std::vector<StepReport> read_steps_csv(const std::string& dir) {
  std::ifstream in(dir + "/steps.csv");
  std::vector<StepReport> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() < 10) continue;
    StepReport r;
    r.t = std::stoi(fields[4]);
    r.chamfer = std::stod(fields[5]);
    r.jaccard = std::stod(fields[6]);
    r.outcome = fields[7];
    r.seconds = std::stod(fields[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace detail

// Full benchmark matrix: objects x reconstructors x policies x repetitions.
// Cells run independently (optionally in parallel), get independent seeds,
// never abort the matrix on failure, and are skipped when already complete.
inline BenchResult run_benchmark(const SuiteConfig& suite) {
  namespace fs = std::filesystem;
  if (suite.out_dir.empty()) throw std::invalid_argument("bench: out_dir required");
  fs::create_directories(suite.out_dir);

  struct Cell {
    std::string scene;
    std::string rec, pol;
    int rep;
    std::string dir;
    std::string object_id;
  };
  std::vector<Cell> cells;
  for (const std::string& scene : suite.scenes)
    for (const std::string& rec : suite.reconstructors)
      for (const std::string& pol : suite.policies)
        for (int rep = 0; rep < suite.repetitions; ++rep) {
          Cell c;
          c.scene = scene;
          c.rec = rec;
          c.pol = pol;
          c.rep = rep;
          c.object_id = detail::object_id_from_scene(scene);
          c.dir = (fs::path(suite.out_dir) / detail::cell_dir_name(c.object_id, rec, pol, rep))
                      .string();
          cells.push_back(std::move(c));
        }

  BenchResult result;
  result.cells.resize(cells.size());

  auto run_cell = [&](size_t idx) {
    const Cell& cell = cells[idx];
    CellStatus& status = result.cells[idx];
    status.cell_id = detail::cell_dir_name(cell.object_id, cell.rec, cell.pol, cell.rep);
    try {
      if (detail::cell_is_complete(cell.dir, suite.run.touches)) {
        status.completed = true;
        status.skipped_resume = true;
        status.steps = detail::read_steps_csv(cell.dir);
        return;
      }
      RunConfig cfg = suite.run;
      cfg.scene_file = cell.scene;
      cfg.checkpoint_file = suite.checkpoint_file.empty() ? cfg.checkpoint_file
                                                          : suite.checkpoint_file;
      cfg.policy = cell.pol;
      cfg.reconstructor = cell.rec;
      cfg.out_dir = cell.dir;
      cfg.run_id = status.cell_id;
      cfg.object_id = cell.object_id;
      cfg.seed = suite.base_seed + stable_hash(status.cell_id);
      const RunResult run = run_active_completion(cfg);
      status.steps = run.steps;
      status.completed = true;
    } catch (const std::exception& e) {
      status.error = e.what();
    }
  };

  const int threads = std::max(1, suite.threads);
  if (threads == 1) {
    for (size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  // aggregate mean and std of chamfer/jaccard per (reconstructor, policy, t)
  struct Agg {
    std::vector<double> chamfer, jaccard;
  };
  std::map<std::tuple<std::string, std::string, int>, Agg> agg;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (!result.cells[i].completed) continue;
    for (const StepReport& row : result.cells[i].steps) {
      Agg& a = agg[{cells[i].rec, cells[i].pol, row.t}];
      if (std::isfinite(row.chamfer)) a.chamfer.push_back(row.chamfer);
      a.jaccard.push_back(row.jaccard);
    }
  }
  auto mean_std = [](const std::vector<double>& xs) {
    if (xs.empty()) return std::pair<double, double>{0, 0};
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= (double)xs.size();
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (double)xs.size();
    return std::pair<double, double>{mean, std::sqrt(var)};
  };
  std::ostringstream csv;
  csv << "reconstructor,policy,t,n,chamfer_mean,chamfer_std,jaccard_mean,jaccard_std\n";
  csv << std::setprecision(12);
  for (const auto& [key, a] : agg) {
    const auto [cm, cs] = mean_std(a.chamfer);
    const auto [jm, js] = mean_std(a.jaccard);
    csv << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << a.jaccard.size() << ',' << cm << ',' << cs << ',' << jm << ',' << js << '\n';
  }
  result.aggregate_csv_path = (fs::path(suite.out_dir) / "aggregate.csv").string();
  detail::atomic_write_text(result.aggregate_csv_path, csv.str());

  std::ostringstream failures;
  failures << "cell_id,error\n";
  result.all_completed = true;
  for (const CellStatus& s : result.cells) {
    if (!s.completed) {
      result.all_completed = false;
      failures << s.cell_id << ",\"" << s.error << "\"\n";
    }
  }
  detail::atomic_write_text((fs::path(suite.out_dir) / "failures.csv").string(), failures.str());
  return result;
}

struct TrainCommandConfig {
  std::string corpus_dir;
  std::string checkpoint_out;
  std::string loss_csv;  // defaults next to the checkpoint
  TrainConfig train;
  std::string precision = "float32";
};

// Loads every corpus cloud, trains the multi-shape decoder, writes the
// checkpoint (double precision on disk) and the loss trace CSV.
inline std::vector<TraceRow> train_command(const TrainCommandConfig& cfg) {
  const auto entries = read_manifest(cfg.corpus_dir);
  if (entries.empty()) throw std::runtime_error("train: empty corpus");
  std::vector<std::pair<PointCloud, std::string>> dataset;
  for (const auto& e : entries) dataset.emplace_back(read_ply(e.cloud_path), e.id);

  std::vector<TraceRow> trace;
  TrainedModel<double> model;
  if (cfg.precision == "float64") {
    TrainResult<double> res = train_multishape<double>(dataset, cfg.train);
    model = std::move(res.model);
    trace = std::move(res.trace);
  } else {
    TrainResult<float> res = train_multishape<float>(dataset, cfg.train);
    model = convert_model<float, double>(res.model);
    trace = std::move(res.trace);
  }
  save_checkpoint(model, cfg.checkpoint_out);

  std::ostringstream csv;
  csv << "iteration,total,data,normal,eikonal\n" << std::setprecision(12);
  for (const TraceRow& r : trace)
    csv << r.iteration << ',' << r.total << ',' << r.data << ',' << r.normal << ',' << r.eikonal
        << '\n';
  const std::string csv_path =
      cfg.loss_csv.empty() ? cfg.checkpoint_out + ".loss.csv" : cfg.loss_csv;
  detail::atomic_write_text(csv_path, csv.str());
  return trace;
}

}  // namespace vhrec
