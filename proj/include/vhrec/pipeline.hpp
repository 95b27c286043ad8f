#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>

#include "vhrec/alpha_shape.hpp"
#include "vhrec/checkpoint.hpp"
#include "vhrec/corpus.hpp"
#include "vhrec/hull.hpp"
#include "vhrec/infer.hpp"
#include "vhrec/metrics.hpp"
#include "vhrec/policies.hpp"

namespace vhrec {

struct RunConfig {
  std::string scene_file;
  std::string checkpoint_file;
  std::string out_dir;
  std::string policy = "uncertainty";       // uncertainty | random | gpis
  std::string reconstructor = "igr";        // igr | hull | alpha | gpis
  int touches = 5;        // M
  int steps = 800;        // G
  int store_every = 50;   // L
  int samples = 4;        // S
  uint64_t seed = 0;
  std::string run_id = "run";
  std::string object_id = "object";

  // evaluation lattice and reconstruction settings
  Aabb bbox{{-1.1, -1.1, -1.1}, {1.1, 1.1, 1.1}};
  int grid_resolution = 40;
  int mesh_resolution = 48;     // reported reconstruction meshes
  int metric_samples = 10000;   // surface samples for Chamfer
  double alpha = 0.35;          // alpha-shape radius for the alpha baseline
  int baseline_max_points = 2000;  // hull/alpha input cap
  GpisParams gpis;
  LossConfig loss;
  double latent_alpha = 1e-3;
  int max_attempts = 5;         // touch reselections per step
  ContactNormalMode contact_normals = ContactNormalMode::GroundTruth;
  std::string precision = "float32";  // float32 | float64
  bool write_artifacts = true;

  void validate() const {
    if (touches < 0) throw std::invalid_argument("config: touches must be >= 0");
    if (store_every < 1 || store_every > steps)
      throw std::invalid_argument("config: store interval must be in [1, steps]");
    if (samples < 2) throw std::invalid_argument("config: need at least 2 shape samples");
    if (policy != "uncertainty" && policy != "random" && policy != "gpis")
      throw std::invalid_argument("config: unknown policy " + policy);
    if (reconstructor != "igr" && reconstructor != "hull" && reconstructor != "alpha" &&
        reconstructor != "gpis")
      throw std::invalid_argument("config: unknown reconstructor " + reconstructor);
    if (precision != "float32" && precision != "float64")
      throw std::invalid_argument("config: unknown precision " + precision);
    const bool needs_model = reconstructor == "igr" || policy == "uncertainty";
    if (needs_model && checkpoint_file.empty())
      throw std::invalid_argument("config: checkpoint required for igr or uncertainty policy");
  }
};

struct StepReport {
  int t = 0;
  double chamfer = 0;
  double jaccard = 0;
  std::string outcome;  // visual | hit | miss | skipped | fallback
  double seconds = 0;
};

struct RunResult {
  std::vector<StepReport> steps;
  PointCloud final_cloud;
  size_t hit_count = 0;
  std::vector<std::string> mesh_files;
};

namespace detail {

// temp-write plus rename so concurrent readers never see partial files
inline void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string steps_csv_header() {
  return "run_id,object,reconstructor,policy,t,chamfer,jaccard,outcome,seconds,seed\n";
}

inline std::string steps_csv_row(const RunConfig& cfg, const StepReport& row) {
  std::ostringstream os;
  os << std::setprecision(12) << cfg.run_id << ',' << cfg.object_id << ',' << cfg.reconstructor
     << ',' << cfg.policy << ',' << row.t << ',' << row.chamfer << ',' << row.jaccard << ','
     << row.outcome << ',' << row.seconds << ',' << cfg.seed << '\n';
  return os.str();
}

inline PointCloud downsample(const PointCloud& cloud, int max_points, uint64_t seed) {
  if ((int)cloud.size() <= max_points) return cloud;
  std::vector<int> keep(cloud.size());
  for (size_t i = 0; i < keep.size(); ++i) keep[i] = (int)i;
  Rng rng(seed);
  std::shuffle(keep.begin(), keep.end(), rng);
  keep.resize(max_points);
  std::sort(keep.begin(), keep.end());
  PointCloud out;
  for (int i : keep) {
    if (cloud.has_normals())
      out.add(cloud.points[i], cloud.normals[i], cloud.sources[i]);
    else
      out.add(cloud.points[i], cloud.sources[i]);
  }
  return out;
}

template <typename S>
struct RunState {
  std::optional<TrainedModel<S>> model;
  std::optional<std::vector<S>> code;  // warm-started across the loop
};

// reported reconstruction for the configured reconstructor at the current cloud
template <typename S>
TriangleMesh reported_reconstruction(const RunConfig& cfg, const PointCloud& cloud,
                                     RunState<S>& state, const std::vector<S>* final_code) {
  if (cfg.reconstructor == "igr") {
    ReconstructOptions opts;
    opts.resolution = cfg.mesh_resolution;
    return reconstruct_mesh(state.model->state, *final_code, cfg.bbox, opts);
  }
  if (cfg.reconstructor == "hull") {
    const PointCloud down = downsample(cloud, cfg.baseline_max_points, cfg.seed ^ 0x41ull);
    return convex_hull(down.points);
  }
  if (cfg.reconstructor == "alpha") {
    const PointCloud down = downsample(cloud, cfg.baseline_max_points, cfg.seed ^ 0xa1ull);
    return alpha_shape(down.points, cfg.alpha, cfg.seed);
  }
  // gpis
  GpisParams prm = cfg.gpis;
  prm.seed = cfg.seed ^ 0x9157ull;
  const GpisModel model = gpis_fit(cloud, prm);
  return gpis_surface(model, cfg.bbox, cfg.grid_resolution);
}

}  // namespace detail

// Active completion per the closed loop: capture once, then repeatedly infer
// the latent code over the growing cloud, reconstruct shape samples from the
// stored intermediate codes, compute the per-voxel variance, touch where the
// policy points, and append hit contacts. Misses mask the offending cluster
// and reselect, bounded by max_attempts; the final row reconstructs after the
// last touch.
template <typename S>
RunResult run_active_completion_t(const RunConfig& cfg, const Scene& scene) {
  namespace fs = std::filesystem;
  cfg.validate();
  const bool needs_model = cfg.reconstructor == "igr" || cfg.policy == "uncertainty";
  detail::RunState<S> state;
  if (needs_model) {
    if (!fs::exists(cfg.checkpoint_file))
      throw std::invalid_argument("config: checkpoint not found: " + cfg.checkpoint_file);
    state.model = convert_model<double, S>(load_checkpoint(cfg.checkpoint_file));
  }
  if (cfg.write_artifacts) fs::create_directories(cfg.out_dir);

  // ground truth references
  const PointCloud gt_samples = sample_surface(scene.ground_truth, cfg.metric_samples,
                                               cfg.seed ^ 0x6767ull);
  const VoxelGrid gt_occ = voxelize(scene.ground_truth, cfg.bbox, cfg.grid_resolution);

  PointCloud cloud = capture_pointcloud(scene);
  Rng probe_rng(cfg.seed ^ 0xbeefull);
  const Vec3 visual_centroid = cloud.centroid();

  RunResult result;
  std::ostringstream run_log;
  std::string pending_outcome = "visual";

  InferConfig infer_cfg;
  infer_cfg.steps = cfg.steps;
  infer_cfg.store_every = cfg.store_every;
  infer_cfg.alpha = cfg.latent_alpha;
  infer_cfg.loss = cfg.loss;

  auto emit_row = [&](int t, const TriangleMesh& recon, double seconds) {
    StepReport row;
    row.t = t;
    row.outcome = pending_outcome;
    row.seconds = seconds;
    if (!recon.empty()) {
      const PointCloud recon_samples =
          sample_surface(recon, cfg.metric_samples, cfg.seed ^ (0x5151ull + t));
      row.chamfer = chamfer_distance(recon_samples, gt_samples);
      row.jaccard = jaccard_similarity(voxelize(recon, cfg.bbox, cfg.grid_resolution, false),
                                       gt_occ);
    } else {
      row.chamfer = std::numeric_limits<double>::quiet_NaN();
      row.jaccard = 0.0;
    }
    result.steps.push_back(row);
    if (cfg.write_artifacts) {
      write_obj(recon, (fs::path(cfg.out_dir) / ("recon_t" + std::to_string(t) + ".obj")).string());
      write_ply(cloud, (fs::path(cfg.out_dir) / ("cloud_t" + std::to_string(t) + ".ply")).string());
      result.mesh_files.push_back("recon_t" + std::to_string(t) + ".obj");
    }
  };

  for (int m = 1; m <= cfg.touches + 1; ++m) {
    const auto step_start = std::chrono::steady_clock::now();
    const int t_row = m - 1;

    // inference over the current cloud (when the model is in play)
    std::optional<InferResult<S>> inferred;
    if (needs_model) {
      infer_cfg.seed = cfg.seed + (uint64_t)m * 7919ull;
      inferred = infer_latent(cloud, *state.model, infer_cfg,
                              state.code ? &*state.code : nullptr);
      state.code = inferred->final_code;
    }

    const TriangleMesh reported = detail::reported_reconstruction<S>(
        cfg, cloud, state, state.code ? &*state.code : nullptr);

    // shape samples and variance for the uncertainty machinery
    std::optional<ShapeSampleSet> samples;
    std::optional<VoxelGrid> variance;
    if (cfg.policy == "uncertainty" && m <= cfg.touches) {
      SampleShapesOptions sso;
      sso.bbox = cfg.bbox;
      sso.grid_resolution = cfg.grid_resolution;
      sso.mesh.resolution = cfg.grid_resolution;
      const auto& stored = inferred->stored;
      const int s_count = std::min<int>(cfg.samples, (int)stored.size());
      std::vector<std::vector<S>> codes(stored.end() - s_count, stored.end());
      samples = sample_shapes(codes, state.model->state, sso);
      variance = voxel_variance(*samples);
      if (cfg.write_artifacts)
        write_avgrid(*variance,
                     (fs::path(cfg.out_dir) / ("variance_t" + std::to_string(m) + ".avgrid"))
                         .string(),
                     GridKind::Variance);
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - step_start).count();
    emit_row(t_row, reported, seconds);
    if (m > cfg.touches) break;

    // touch selection with miss reselection
    std::vector<char> mask(variance ? variance->cell_count()
                                    : (size_t)cfg.grid_resolution * cfg.grid_resolution *
                                          cfg.grid_resolution,
                           0);
    std::string outcome = "skipped";
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      TouchTarget target;
      bool have_target = false;
      try {
        if (cfg.policy == "uncertainty") {
          SelectTouchOptions sto;
          sto.seed = cfg.seed + (uint64_t)m * 131ull + attempt;
          target = select_touch(*variance, samples->mean_mesh(), sto, &mask);
          have_target = true;
        } else if (cfg.policy == "random") {
          PolicyOptions po;
          po.bbox = cfg.bbox;
          po.grid_resolution = cfg.grid_resolution;
          po.seed = cfg.seed + (uint64_t)m * 131ull + attempt;
          target = random_policy(reported, po, &mask);
          have_target = true;
        } else {  // gpis policy
          if (cloud.count(PointSource::Haptic) == 0) {
            target = gpis_first_touch(scene.camera.position, visual_centroid);
            have_target = true;
          } else {
            GpisParams prm = cfg.gpis;
            prm.seed = cfg.seed ^ (uint64_t)m;
            const GpisModel gp = gpis_fit(cloud, prm);
            PolicyOptions po;
            po.bbox = cfg.bbox;
            po.grid_resolution = cfg.grid_resolution;
            const GpisPolicyResult res = gpis_policy(gp, po, &mask);
            if (res.first_touch_heuristic)
              target = gpis_first_touch(scene.camera.position, visual_centroid);
            else
              target = res.target;
            have_target = true;
          }
        }
      } catch (const std::exception&) {
        break;  // no target available; step is skipped
      }
      if (!have_target) break;

      const ContactResult contact = execute_touch(scene, target, probe_rng);
      run_log << nlohmann::json{{"step", m},
                                {"attempt", attempt},
                                {"voxel", target.voxel},
                                {"position", {target.position.x, target.position.y,
                                              target.position.z}},
                                {"direction", {target.approach.x, target.approach.y,
                                               target.approach.z}},
                                {"flatness", target.flatness},
                                {"fallback", target.fallback},
                                {"outcome", contact.hit ? "hit" : "miss"}}
                       .dump()
              << '\n';
      if (contact.hit) {
        cloud.append(contact_to_observation(contact, target, cfg.contact_normals));
        ++result.hit_count;
        outcome = target.fallback ? "fallback" : "hit";
        break;
      }
      // mask the offending voxel and its cluster, then reselect
      if (target.voxel >= 0) {
        mask[target.voxel] = 1;
        for (int v : target.cluster_voxels) mask[v] = 1;
      } else {
        outcome = "miss";  // heuristic targets have no voxel to mask
        break;
      }
    }
    pending_outcome = outcome;
  }

  result.final_cloud = cloud;
  if (cfg.write_artifacts) {
    detail::atomic_write_text((fs::path(cfg.out_dir) / "run.log.jsonl").string(), run_log.str());
    std::string csv = detail::steps_csv_header();
    for (const StepReport& row : result.steps) csv += detail::steps_csv_row(cfg, row);
    detail::atomic_write_text((fs::path(cfg.out_dir) / "steps.csv").string(), csv);
  }
  return result;
}

inline RunResult run_active_completion(const RunConfig& cfg) {
  const Scene scene = load_scene(cfg.scene_file);
  if (cfg.precision == "float64") return run_active_completion_t<double>(cfg, scene);
  return run_active_completion_t<float>(cfg, scene);
}

inline RunResult run_active_completion(const RunConfig& cfg, const Scene& scene) {
  if (cfg.precision == "float64") return run_active_completion_t<double>(cfg, scene);
  return run_active_completion_t<float>(cfg, scene);
}

}  // namespace vhrec
