#pragma once

#include <filesystem>

#include <json.hpp>

#include "vhrec/bvh.hpp"
#include "vhrec/io.hpp"
#include "vhrec/pointcloud.hpp"
#include "vhrec/uncertainty.hpp"

namespace vhrec {

struct Camera {
  Vec3 position{0, 0, -3};
  Vec3 look_at{0, 0, 0};
  Vec3 up{0, 1, 0};
  double fov_deg = 60.0;  // vertical field of view
  int width = 160;
  int height = 120;
};

struct ProbeParams {
  double contact_sigma = 0.0;   // contact noise along the approach direction
  double beyond = 0.10;         // how far past the target the probe travels
  double start_back = 3.0;      // probe start distance behind the target
};

// Simulated tabletop: one normalized ground-truth mesh, a pinhole camera,
// and a straight-line probe.
struct Scene {
  TriangleMesh ground_truth;
  Camera camera;
  ProbeParams probe;
  uint64_t seed = 0;
  std::string mesh_path;  // provenance for the scene file

  Scene(TriangleMesh mesh, const Camera& cam, const ProbeParams& pp, uint64_t seed_ = 0)
      : ground_truth(std::move(mesh)), camera(cam), probe(pp), seed(seed_),
        bvh_(std::make_unique<Bvh>(ground_truth)) {
    validate();
  }

  const Bvh& bvh() const { return *bvh_; }

  void validate() const {
    if (ground_truth.empty()) throw std::invalid_argument("scene: empty ground truth mesh");
    if (probe.beyond <= 0) throw std::invalid_argument("scene: beyond distance must be > 0");
    const Aabb box = ground_truth.bounds();
    const double r = norm(box.extent()) * 0.5;
    if (norm(camera.position - box.center()) <= r)
      throw std::invalid_argument("scene: camera inside the mesh bounding sphere");
  }

 private:
  std::unique_ptr<Bvh> bvh_;
};

// One ray per pixel through the pinhole model; hits become visual points
// with outward normals. Only camera-facing surface can appear.
inline PointCloud capture_pointcloud(const Scene& scene) {
  const Camera& cam = scene.camera;
  const Vec3 forward = normalized(cam.look_at - cam.position);
  Vec3 right = cross(forward, cam.up);
  if (norm(right) < 1e-9) throw std::invalid_argument("capture: camera up parallel to view");
  right = normalized(right);
  const Vec3 up = cross(right, forward);
  const double tan_y = std::tan(cam.fov_deg * M_PI / 360.0);
  const double tan_x = tan_y * (double)cam.width / (double)cam.height;

  PointCloud cloud;
  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      const double sx = (2.0 * (px + 0.5) / cam.width - 1.0) * tan_x;
      const double sy = (1.0 - 2.0 * (py + 0.5) / cam.height) * tan_y;
      const Vec3 dir = normalized(forward + right * sx + up * sy);
      const auto hit = scene.bvh().intersect(cam.position, dir);
      if (!hit) continue;
      cloud.add(hit->point, hit->normal, PointSource::Visual);
    }
  }
  if (cloud.empty()) throw std::runtime_error("capture: object out of view");
  return cloud;
}

struct ContactResult {
  bool hit = false;
  Vec3 point;    // contact position (noise applied along the approach)
  Vec3 normal;   // outward ground-truth surface normal at the contact
  double travel = 0;  // ray distance from the probe start to the contact
};

// Straight-line probe toward the target and `beyond` past it. The contact
// registers only if the first ground-truth intersection lies within
// start_back + beyond of the probe start; otherwise the probe retreats and
// reports a miss.
inline ContactResult execute_touch(const Scene& scene, const TouchTarget& target, Rng& rng) {
  if (!is_unit(target.approach))
    throw std::invalid_argument("execute_touch: approach direction must be unit length");
  const Vec3 start = target.position - target.approach * scene.probe.start_back;
  {
    const Aabb box = scene.ground_truth.bounds();
    const double r = norm(box.extent()) * 0.5;
    if (norm(start - box.center()) <= r)
      throw std::invalid_argument("execute_touch: probe start inside the bounding sphere");
  }
  ContactResult result;
  const auto hit = scene.bvh().intersect(start, target.approach);
  if (!hit || hit->t > scene.probe.start_back + scene.probe.beyond) return result;  // miss
  result.hit = true;
  result.travel = hit->t;
  result.point = hit->point;
  if (scene.probe.contact_sigma > 0)
    result.point += target.approach * gaussian(rng, 0.0, scene.probe.contact_sigma);
  result.normal = hit->normal;  // anti-parallel to the probe: outward on first hit
  return result;
}

enum class ContactNormalMode { GroundTruth, Approach };

// One haptic observation from a contact. gt-normal attaches the true surface
// normal; approach-normal substitutes the negated probe direction.
inline PointCloud contact_to_observation(const ContactResult& result, const TouchTarget& target,
                                         ContactNormalMode mode = ContactNormalMode::GroundTruth) {
  if (!result.hit) throw std::invalid_argument("contact_to_observation: called on a miss");
  PointCloud cloud;
  const Vec3 n =
      mode == ContactNormalMode::GroundTruth ? result.normal : -target.approach;
  cloud.add(result.point, n, PointSource::Haptic);
  return cloud;
}

// Scene description JSON: mesh path, camera, probe parameters, seed.
inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene: " + path);
  nlohmann::json j;
  in >> j;
  std::string mesh_path = j.at("mesh");
  if (!std::filesystem::path(mesh_path).is_absolute() && !std::filesystem::exists(mesh_path)) {
    // relative mesh paths resolve against the scene file's directory
    const auto beside = std::filesystem::path(path).parent_path() / mesh_path;
    if (std::filesystem::exists(beside)) mesh_path = beside.string();
  }
  TriangleMesh mesh;
  if (mesh_path.size() >= 4 && mesh_path.substr(mesh_path.size() - 4) == ".stl")
    mesh = read_stl(mesh_path);
  else
    mesh = read_obj(mesh_path);
  Camera cam;
  if (j.contains("camera")) {
    const auto& c = j["camera"];
    auto vec = [](const nlohmann::json& a) { return Vec3{a.at(0), a.at(1), a.at(2)}; };
    if (c.contains("position")) cam.position = vec(c["position"]);
    if (c.contains("look_at")) cam.look_at = vec(c["look_at"]);
    if (c.contains("up")) cam.up = vec(c["up"]);
    cam.fov_deg = c.value("fov_deg", cam.fov_deg);
    cam.width = c.value("width", cam.width);
    cam.height = c.value("height", cam.height);
  }
  ProbeParams probe;
  if (j.contains("probe")) {
    const auto& p = j["probe"];
    probe.contact_sigma = p.value("contact_sigma", probe.contact_sigma);
    probe.beyond = p.value("beyond", probe.beyond);
    probe.start_back = p.value("start_back", probe.start_back);
  }
  Scene scene(std::move(mesh), cam, probe, j.value("seed", 0));
  scene.mesh_path = mesh_path;
  return scene;
}

inline void save_scene(const Scene& scene, const std::string& path) {
  nlohmann::json j;
  j["mesh"] = scene.mesh_path;
  j["camera"] = {{"position", {scene.camera.position.x, scene.camera.position.y,
                               scene.camera.position.z}},
                 {"look_at", {scene.camera.look_at.x, scene.camera.look_at.y,
                              scene.camera.look_at.z}},
                 {"up", {scene.camera.up.x, scene.camera.up.y, scene.camera.up.z}},
                 {"fov_deg", scene.camera.fov_deg},
                 {"width", scene.camera.width},
                 {"height", scene.camera.height}};
  j["probe"] = {{"contact_sigma", scene.probe.contact_sigma},
                {"beyond", scene.probe.beyond},
                {"start_back", scene.probe.start_back}};
  j["seed"] = scene.seed;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace vhrec
