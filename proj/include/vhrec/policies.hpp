#pragma once

#include "vhrec/gpis.hpp"
#include "vhrec/uncertainty.hpp"

namespace vhrec {

struct PolicyOptions {
  Aabb bbox{{-1.1, -1.1, -1.1}, {1.1, 1.1, 1.1}};
  int grid_resolution = 40;
  int surface_samples = 10000;
  uint64_t seed = 0;
};

// Uniformly samples surface voxels of the voxelized reconstruction and
// returns the first with an unobstructed straight-line approach.
inline TouchTarget random_policy(const TriangleMesh& recon, const PolicyOptions& opts = {},
                                 const std::vector<char>* masked = nullptr) {
  if (recon.empty()) throw std::invalid_argument("random_policy: empty reconstruction");
  const VoxelGrid occ = voxelize(recon, opts.bbox, opts.grid_resolution, /*strict=*/false);
  std::vector<int> shell = surface_shell(occ);
  if (masked)
    std::erase_if(shell, [&](int v) { return (*masked)[v]; });
  if (shell.empty()) throw std::runtime_error("random_policy: no unmasked surface voxel");

  Rng rng(opts.seed);
  std::shuffle(shell.begin(), shell.end(), rng);
  const Bvh bvh(recon);
  const PointCloud samples = sample_surface(recon, opts.surface_samples, opts.seed);
  const KdTree tree(samples.points);
  const Aabb mesh_box = recon.bounds();
  const double exit_radius =
      norm(mesh_box.extent()) * 0.5 + norm(mesh_box.center()) + 3.0 * occ.voxel_edge;

  for (int voxel : shell) {
    TouchTarget target;
    if (!detail::make_target_at_voxel(occ, voxel, bvh, tree, samples, target)) continue;
    // the straight-line approach must reach the target without the
    // reconstruction blocking it earlier
    const Vec3 back = -target.approach;
    const auto block = bvh.intersect(target.position, back, 1e-6, 2.0 * exit_radius);
    if (block) continue;
    return target;
  }
  throw std::runtime_error("random_policy: no reachable voxel after exhausting candidates");
}

struct GpisPolicyResult {
  TouchTarget target;
  bool first_touch_heuristic = false;  // no posterior shell was available
};

// First touch before any haptic data: a point on the camera-centroid line
// behind the visual centroid, approached back toward the camera.
inline TouchTarget gpis_first_touch(const Vec3& camera_position, const Vec3& visual_centroid,
                                    double behind_offset = 0.1) {
  TouchTarget t;
  const Vec3 behind = normalized(visual_centroid - camera_position);
  t.position = visual_centroid + behind * behind_offset;
  t.approach = -behind;
  t.fallback = false;
  return t;
}

// Selects the posterior-mean zero-shell voxel with the largest posterior
// standard deviation.
inline GpisPolicyResult gpis_policy(const GpisModel& model, const PolicyOptions& opts = {},
                                    const std::vector<char>* masked = nullptr) {
  const int res = opts.grid_resolution;
  VoxelGrid occ(opts.bbox.lo, opts.bbox.longest_extent() / res, {res, res, res});
  std::vector<Vec3> centers;
  centers.reserve(occ.cell_count());
  for (size_t i = 0; i < occ.cell_count(); ++i) centers.push_back(occ.center((int)i));
  std::vector<double> mean;
  model.predict_mean(centers, mean);
  for (size_t i = 0; i < occ.cell_count(); ++i) occ.values[i] = mean[i] < 0 ? 1.0 : 0.0;

  std::vector<int> shell = surface_shell(occ);
  if (masked)
    std::erase_if(shell, [&](int v) { return (*masked)[v]; });

  GpisPolicyResult result;
  if (shell.empty()) {
    result.first_touch_heuristic = true;
    result.target.fallback = true;
    return result;  // caller supplies camera/centroid via gpis_first_touch
  }

  // the variance solve is quadratic in the training size; only shell voxels need it
  std::vector<Vec3> shell_centers;
  shell_centers.reserve(shell.size());
  for (int v : shell) shell_centers.push_back(occ.center(v));
  std::vector<double> sm, ss;
  model.predict(shell_centers, sm, ss);
  std::vector<double> sd(occ.cell_count(), 0.0);
  for (size_t i = 0; i < shell.size(); ++i) sd[shell[i]] = ss[i];

  int best = shell.front();
  for (int v : shell)
    if (sd[v] > sd[best]) best = v;

  // approach along the posterior gradient direction at the voxel center,
  // estimated by central differences on the mean
  const Vec3 c = occ.center(best);
  const double h = occ.voxel_edge;
  std::vector<Vec3> probes = {c + Vec3{h, 0, 0}, c - Vec3{h, 0, 0}, c + Vec3{0, h, 0},
                              c - Vec3{0, h, 0}, c + Vec3{0, 0, h}, c - Vec3{0, 0, h}};
  std::vector<double> pm, ps;
  model.predict(probes, pm, ps);
  Vec3 grad{(pm[0] - pm[1]) / (2 * h), (pm[2] - pm[3]) / (2 * h), (pm[4] - pm[5]) / (2 * h)};
  if (norm(grad) < 1e-12) grad = {0, 0, 1};
  result.target.voxel = best;
  result.target.position = c;
  result.target.approach = -normalized(grad);  // into the surface from outside
  result.target.flatness = sd[best];
  return result;
}

}  // namespace vhrec
