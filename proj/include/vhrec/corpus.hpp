#pragma once

#include <filesystem>

#include <json.hpp>

#include "vhrec/haptic.hpp"
#include "vhrec/io.hpp"
#include "vhrec/primitives.hpp"
#include "vhrec/sampling.hpp"

namespace vhrec {

struct CorpusConfig {
  std::string out_dir;
  int shapes = 10;
  int rotations = 8;
  int points_per_cloud = 20000;
  uint64_t seed = 0;
  std::vector<std::string> families = {"sphere", "box", "cylinder", "capsule", "superellipsoid"};
  bool scenes = true;  // also emit a scene JSON per sample
  Camera camera;       // camera used for emitted scenes
};

struct CorpusEntry {
  std::string id;
  std::string family;
  std::string mesh_path;
  std::string cloud_path;
  std::string scene_path;  // empty when scenes are disabled
};

namespace detail {

inline TriangleMesh make_family_shape(const std::string& family, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (family == "sphere") {
    return make_icosphere(0.5 + 0.5 * u(rng), 3);
  }
  if (family == "box") {
    return make_box({0.3 + 0.7 * u(rng), 0.3 + 0.7 * u(rng), 0.3 + 0.7 * u(rng)});
  }
  if (family == "cylinder") {
    return make_cylinder(0.25 + 0.5 * u(rng), 0.6 + 1.2 * u(rng), 48);
  }
  if (family == "capsule") {
    return make_capsule(0.2 + 0.4 * u(rng), 0.3 + 0.7 * u(rng), 32, 8);
  }
  if (family == "superellipsoid") {
    return make_superellipsoid(0.4 + 0.6 * u(rng), 0.4 + 0.6 * u(rng), 0.4 + 0.6 * u(rng),
                               0.3 + 1.0 * u(rng), 0.3 + 1.0 * u(rng), 24, 48);
  }
  throw std::invalid_argument("unknown shape family: " + family);
}

}  // namespace detail

// Procedural training corpus: randomized primitives rotated into several
// views, normalized so the longest extent is 2, and sampled into oriented
// point clouds. Writes meshes/, clouds/, optional scenes/, and manifest.json.
inline std::vector<CorpusEntry> build_corpus(const CorpusConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.out_dir.empty()) throw std::invalid_argument("build_corpus: out_dir required");
  fs::create_directories(fs::path(cfg.out_dir) / "meshes");
  fs::create_directories(fs::path(cfg.out_dir) / "clouds");
  if (cfg.scenes) fs::create_directories(fs::path(cfg.out_dir) / "scenes");

  Rng rng(cfg.seed);
  std::vector<CorpusEntry> entries;
  nlohmann::json manifest;
  manifest["seed"] = cfg.seed;
  manifest["entries"] = nlohmann::json::array();

  for (int s = 0; s < cfg.shapes; ++s) {
    const std::string& family = cfg.families[s % cfg.families.size()];
    const TriangleMesh base = detail::make_family_shape(family, rng);
    for (int r = 0; r < cfg.rotations; ++r) {
      TriangleMesh mesh = rotate_mesh(base, random_rotation(rng));
      mesh = normalize_mesh(mesh).mesh;
      mesh.orient_outward();

      CorpusEntry entry;
      entry.id = family + "_" + std::to_string(s) + "_r" + std::to_string(r);
      entry.family = family;
      entry.mesh_path = (fs::path(cfg.out_dir) / "meshes" / (entry.id + ".obj")).string();
      entry.cloud_path = (fs::path(cfg.out_dir) / "clouds" / (entry.id + ".ply")).string();
      write_obj(mesh, entry.mesh_path);
      const PointCloud cloud = sample_surface(mesh, cfg.points_per_cloud, rng);
      write_ply(cloud, entry.cloud_path);

      if (cfg.scenes) {
        entry.scene_path = (fs::path(cfg.out_dir) / "scenes" / (entry.id + ".json")).string();
        Scene scene(mesh, cfg.camera, ProbeParams{}, cfg.seed + (uint64_t)s * 1000 + r);
        scene.mesh_path = entry.mesh_path;
        save_scene(scene, entry.scene_path);
      }

      manifest["entries"].push_back({{"id", entry.id},
                                     {"family", entry.family},
                                     {"mesh", entry.mesh_path},
                                     {"cloud", entry.cloud_path},
                                     {"scene", entry.scene_path}});
      entries.push_back(std::move(entry));
    }
  }

  std::ofstream out(fs::path(cfg.out_dir) / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("build_corpus: cannot write manifest");
  return entries;
}

inline std::vector<CorpusEntry> read_manifest(const std::string& corpus_dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(corpus_dir) / "manifest.json");
  if (!in) throw std::runtime_error("cannot open manifest in " + corpus_dir);
  nlohmann::json manifest;
  in >> manifest;
  std::vector<CorpusEntry> entries;
  for (const auto& e : manifest.at("entries")) {
    CorpusEntry entry;
    entry.id = e.at("id");
    entry.family = e.value("family", "");
    entry.mesh_path = e.at("mesh");
    entry.cloud_path = e.at("cloud");
    entry.scene_path = e.value("scene", "");
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace vhrec
