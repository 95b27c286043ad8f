#pragma once

#include <deque>

#include "vhrec/bvh.hpp"
#include "vhrec/kdtree.hpp"
#include "vhrec/plane_fit.hpp"
#include "vhrec/reconstruct.hpp"
#include "vhrec/sampling.hpp"
#include "vhrec/voxelize.hpp"

namespace vhrec {

// Binary occupancy grids reconstructed from a set of latent codes, plus the
// source meshes. The last mesh (most-optimized code) anchors touch planning.
struct ShapeSampleSet {
  std::vector<VoxelGrid> grids;
  std::vector<TriangleMesh> meshes;
  std::vector<bool> uniform_sign;  // code whose field never crossed zero

  const TriangleMesh& mean_mesh() const {
    if (meshes.empty()) throw std::logic_error("empty shape sample set");
    return meshes.back();
  }
};

struct SampleShapesOptions {
  Aabb bbox{{-1.1, -1.1, -1.1}, {1.1, 1.1, 1.1}};
  int grid_resolution = 40;
  ReconstructOptions mesh;  // marching cubes settings
};

// Mesh then voxelize each latent code on a shared lattice.
template <typename S>
ShapeSampleSet sample_shapes(const std::vector<std::vector<S>>& codes,
                             const DecoderState<S>& state,
                             const SampleShapesOptions& opts = {}) {
  if (codes.size() < 2) throw std::invalid_argument("sample_shapes: need at least 2 codes");
  ShapeSampleSet set;
  for (const auto& code : codes) {
    TriangleMesh mesh = reconstruct_mesh(state, code, opts.bbox, opts.mesh);
    const bool flat = mesh.empty();
    // marching cubes output is closed by construction (boundary capping); the
    // occasional ambiguous-case pinhole is tolerated by the parity rule
    set.grids.push_back(voxelize(mesh, opts.bbox, opts.grid_resolution, /*strict=*/false));
    set.meshes.push_back(std::move(mesh));
    set.uniform_sign.push_back(flat);
  }
  return set;
}

// Per-voxel population variance p(1-p) of the binary occupancies; maximal
// 0.25 when the samples split evenly.
inline VoxelGrid voxel_variance(const ShapeSampleSet& samples) {
  if (samples.grids.empty()) throw std::invalid_argument("voxel_variance: no samples");
  for (const VoxelGrid& g : samples.grids)
    if (!g.same_lattice(samples.grids.front()))
      throw std::invalid_argument("voxel_variance: lattice mismatch");
  VoxelGrid var = samples.grids.front();
  std::fill(var.values.begin(), var.values.end(), 0.0);
  const double inv_s = 1.0 / (double)samples.grids.size();
  for (const VoxelGrid& g : samples.grids)
    for (size_t i = 0; i < var.values.size(); ++i) var.values[i] += g.values[i];
  for (double& v : var.values) {
    const double p = v * inv_s;
    v = p * (1.0 - p);
  }
  return var;
}

// The chosen action: where to touch and from which direction.
struct TouchTarget {
  int voxel = -1;        // linear index in the variance lattice
  Vec3 position;         // on the mean reconstruction surface
  Vec3 approach;         // unit vector pointing into the surface
  int cluster_id = -1;
  double flatness = 0;   // plane-fit RMS of the winning cluster
  bool fallback = false; // set when the variance grid carried no signal
  std::vector<int> cluster_voxels;  // members of the winning cluster, for masking
};

struct SelectTouchOptions {
  double eps_rel = 0.05;        // relative band counting as "maximal variance"
  int surface_samples = 10000;  // mean-mesh samples for plane fitting
  uint64_t seed = 0;            // sampling + fallback draw
  int min_cluster_samples = 3;  // below this a cluster cannot be ranked
};

namespace detail {

struct VoxelCluster {
  std::vector<int> voxels;
  Aabb dilated_bounds;  // world-space, one voxel beyond the member voxels
  int centroid_voxel = -1;
};

inline std::vector<VoxelCluster> cluster_candidates(const VoxelGrid& grid,
                                                    const std::vector<int>& candidates) {
  std::vector<VoxelCluster> clusters;
  std::vector<char> in_set(grid.cell_count(), 0);
  std::vector<int> cluster_of(grid.cell_count(), -1);
  for (int v : candidates) in_set[v] = 1;
  for (int seed_voxel : candidates) {
    if (cluster_of[seed_voxel] >= 0) continue;
    VoxelCluster cluster;
    std::deque<int> queue{seed_voxel};
    cluster_of[seed_voxel] = (int)clusters.size();
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      cluster.voxels.push_back(v);
      const auto c = grid.coords(v);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const int ix = c[0] + dx, iy = c[1] + dy, iz = c[2] + dz;
            if (!grid.in_range(ix, iy, iz)) continue;
            const int w = grid.index(ix, iy, iz);
            if (in_set[w] && cluster_of[w] < 0) {
              cluster_of[w] = (int)clusters.size();
              queue.push_back(w);
            }
          }
    }
    std::sort(cluster.voxels.begin(), cluster.voxels.end());

    // centroid voxel: member closest to the mean lattice coordinate
    double mx = 0, my = 0, mz = 0;
    for (int v : cluster.voxels) {
      const auto cc = grid.coords(v);
      mx += cc[0];
      my += cc[1];
      mz += cc[2];
    }
    mx /= cluster.voxels.size();
    my /= cluster.voxels.size();
    mz /= cluster.voxels.size();
    double best = std::numeric_limits<double>::infinity();
    for (int v : cluster.voxels) {
      const auto cc = grid.coords(v);
      const double d = (cc[0] - mx) * (cc[0] - mx) + (cc[1] - my) * (cc[1] - my) +
                       (cc[2] - mz) * (cc[2] - mz);
      if (d < best) {
        best = d;
        cluster.centroid_voxel = v;
      }
    }

    Aabb box;
    for (int v : cluster.voxels) {
      const auto cc = grid.coords(v);
      box.expand(grid.origin + Vec3{cc[0] * grid.voxel_edge, cc[1] * grid.voxel_edge,
                                    cc[2] * grid.voxel_edge});
      box.expand(grid.origin + Vec3{(cc[0] + 1) * grid.voxel_edge, (cc[1] + 1) * grid.voxel_edge,
                                    (cc[2] + 1) * grid.voxel_edge});
    }
    cluster.dilated_bounds = {box.lo - Vec3{grid.voxel_edge, grid.voxel_edge, grid.voxel_edge},
                              box.hi + Vec3{grid.voxel_edge, grid.voxel_edge, grid.voxel_edge}};
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

// Chooses the approach sign along the fitted normal: the probe must be able
// to retreat from the contact point out of the bounding sphere without
// re-entering the mesh.
inline bool approach_is_free(const Bvh& bvh, const Vec3& position, const Vec3& approach,
                             double exit_radius) {
  const Vec3 back = -approach;
  const auto hit = bvh.intersect(position, back, 1e-6, 2.0 * exit_radius);
  return !hit.has_value();
}

// Builds a touch target at a voxel from a local plane fit of nearby surface
// samples. Returns false when no usable geometry is near the voxel.
inline bool make_target_at_voxel(const VoxelGrid& grid, int voxel, const Bvh& mesh_bvh,
                                 const KdTree& sample_tree, const PointCloud& samples,
                                 TouchTarget& out) {
  const Vec3 center = grid.center(voxel);
  const double edge = grid.voxel_edge;
  // nearby samples within a 3-voxel radius of the center
  std::vector<Vec3> local;
  const auto near_samples = sample_tree.knearest(center, 64);
  const double r2 = 9.0 * edge * edge;
  for (const auto& [idx, d2] : near_samples) {
    if (d2 <= r2) local.push_back(samples.points[idx]);
  }
  Vec3 normal;
  if (local.size() >= 3) {
    const PlaneFit fit = fit_plane(local);
    normal = fit.normal;
    out.flatness = fit.rms;
  } else {
    // fall back to the nearest sample's surface normal
    const auto [idx, d2] = sample_tree.nearest(center);
    if (d2 > 36.0 * edge * edge) return false;
    normal = samples.normals[idx];
    out.flatness = std::numeric_limits<double>::infinity();
  }

  // orient the fitted normal like the nearby surface normals
  Vec3 mean_normal;
  {
    const auto nn = sample_tree.knearest(center, 8);
    for (const auto& [idx, d2] : nn) mean_normal += samples.normals[idx];
  }
  if (dot(normal, mean_normal) < 0) normal = -normal;

  // project the voxel center onto the mesh along +-normal
  Vec3 position = center;
  bool projected = false;
  const auto hit_n = mesh_bvh.intersect(center, normal, 1e-9);
  const auto hit_m = mesh_bvh.intersect(center, -normal, 1e-9);
  if (hit_n && (!hit_m || hit_n->t <= hit_m->t)) {
    position = hit_n->point;
    projected = true;
  } else if (hit_m) {
    position = hit_m->point;
    projected = true;
  }
  if (!projected) {
    const auto [idx, d2] = sample_tree.nearest(center);
    position = samples.points[idx];
  }
  const Aabb box = grid.bbox();
  position = cwise_max(box.lo, cwise_min(box.hi, position));

  const Aabb mesh_box = mesh_bvh.mesh().bounds();
  const double exit_radius =
      norm(mesh_box.extent()) * 0.5 + norm(mesh_box.center()) + 3.0 * edge;

  // outward normal means approaching along -normal
  const Vec3 primary = -normal;
  if (approach_is_free(mesh_bvh, position, primary, exit_radius)) {
    out.approach = primary;
  } else if (approach_is_free(mesh_bvh, position, normal, exit_radius)) {
    out.approach = normal;
  } else {
    out.approach = primary;  // both blocked; keep the outward guess
  }
  out.voxel = voxel;
  out.position = position;
  return true;
}

}  // namespace detail

// Touch selection: among voxels within eps_rel of the maximum variance,
// group into 26-connected clusters and pick the cluster whose nearby mean
// surface is flattest (smallest plane-fit RMS). With an all-zero variance
// grid the target falls back to a random surface voxel and is flagged.
inline TouchTarget select_touch(const VoxelGrid& variance, const TriangleMesh& mean_mesh,
                                const SelectTouchOptions& opts = {},
                                const std::vector<char>* masked = nullptr) {
  for (double v : variance.values)
    if (v < 0) throw std::invalid_argument("select_touch: negative variance");
  if (mean_mesh.empty()) throw std::invalid_argument("select_touch: empty mean mesh");

  const Bvh bvh(mean_mesh);
  const PointCloud samples = sample_surface(mean_mesh, opts.surface_samples, opts.seed);
  const KdTree tree(samples.points);

  double vmax = 0;
  for (size_t i = 0; i < variance.values.size(); ++i) {
    if (masked && (*masked)[i]) continue;
    vmax = std::max(vmax, variance.values[i]);
  }

  TouchTarget target;
  if (vmax <= 0) {
    // no uncertainty signal; probe a random surface voxel of the mean mesh
    const VoxelGrid occ = voxelize(mean_mesh, variance.bbox(), variance.dims[0], false);
    std::vector<int> shell = surface_shell(occ);
    if (masked)
      std::erase_if(shell, [&](int v) { return (*masked)[v]; });
    if (shell.empty()) throw std::runtime_error("select_touch: no unmasked surface voxel");
    Rng rng(opts.seed);
    const int voxel = shell[std::uniform_int_distribution<size_t>(0, shell.size() - 1)(rng)];
    if (!detail::make_target_at_voxel(variance, voxel, bvh, tree, samples, target))
      throw std::runtime_error("select_touch: fallback target construction failed");
    target.fallback = true;
    target.cluster_voxels = {voxel};
    return target;
  }

  std::vector<int> candidates;
  const double threshold = (1.0 - opts.eps_rel) * vmax;
  for (size_t i = 0; i < variance.values.size(); ++i) {
    if (masked && (*masked)[i]) continue;
    if (variance.values[i] >= threshold) candidates.push_back((int)i);
  }
  std::vector<detail::VoxelCluster> clusters = detail::cluster_candidates(variance, candidates);

  // flatness per cluster from surface samples inside the dilated bounds
  int best = -1;
  double best_rms = std::numeric_limits<double>::infinity();
  size_t best_count = 0;
  std::vector<double> rms(clusters.size(), std::numeric_limits<double>::infinity());
  for (size_t c = 0; c < clusters.size(); ++c) {
    std::vector<Vec3> local;
    for (const Vec3& p : samples.points)
      if (clusters[c].dilated_bounds.contains(p)) local.push_back(p);
    if ((int)local.size() >= opts.min_cluster_samples) rms[c] = fit_plane(local).rms;
    const bool better =
        rms[c] < best_rms ||
        (rms[c] == best_rms && (local.size() > best_count ||
                                (local.size() == best_count && best >= 0 &&
                                 clusters[c].centroid_voxel < clusters[best].centroid_voxel)));
    if (best < 0 || better) {
      best = (int)c;
      best_rms = rms[c];
      best_count = local.size();
    }
  }

  if (best_rms == std::numeric_limits<double>::infinity()) {
    // no cluster had enough nearby surface; take the one holding the
    // global maximum-variance voxel
    int argmax = -1;
    double vbest = -1;
    for (int v : candidates)
      if (variance.values[v] > vbest) {
        vbest = variance.values[v];
        argmax = v;
      }
    for (size_t c = 0; c < clusters.size(); ++c)
      if (std::binary_search(clusters[c].voxels.begin(), clusters[c].voxels.end(), argmax))
        best = (int)c;
  }

  const detail::VoxelCluster& win = clusters[best];
  if (!detail::make_target_at_voxel(variance, win.centroid_voxel, bvh, tree, samples, target))
    throw std::runtime_error("select_touch: target construction failed");
  target.cluster_id = best;
  target.flatness = rms[best];
  target.cluster_voxels = win.voxels;
  return target;
}

}  // namespace vhrec
