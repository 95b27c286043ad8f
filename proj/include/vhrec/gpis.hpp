#pragma once

#include <Eigen/Dense>

#include "vhrec/marching_cubes.hpp"
#include "vhrec/pointcloud.hpp"

namespace vhrec {

struct GpisParams {
  double sigma_f = 1.0;   // kernel amplitude
  double ell = 0.4;       // exponential length scale
  double sigma_n = 1e-6;  // observation jitter
  double offset = 0.05;   // off-surface point displacement d
  int max_surface_points = 800;
  uint64_t seed = 0;      // downsampling draw
};

// Gaussian process over the implicit surface with the exponential kernel
// k(r) = sigma_f^2 exp(-r / ell). Training targets: 0 on the surface, +d at
// p + d n (outside) and -d at p - d n (inside-negative convention).
class GpisModel {
 public:
  GpisModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, GpisParams params)
      : x_(std::move(inputs)), params_(params) {
    const int m = (int)x_.rows();
    Eigen::MatrixXd gram(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double k = kernel((x_.row(i) - x_.row(j)).norm());
        gram(i, j) = k;
        gram(j, i) = k;
      }
    }
    double jitter = params_.sigma_n * params_.sigma_n;
    for (int attempt = 0;; ++attempt) {
      Eigen::MatrixXd reg = gram + jitter * Eigen::MatrixXd::Identity(m, m);
      llt_.compute(reg);
      if (llt_.info() == Eigen::Success) break;
      if (attempt >= 12)
        throw std::runtime_error("gpis_fit: factorization failed after max jitter");
      jitter = std::max(jitter * 10.0, 1e-12);
    }
    alpha_ = llt_.solve(targets);
  }

  double kernel(double r) const { return params_.sigma_f * params_.sigma_f * std::exp(-r / params_.ell); }

  const GpisParams& params() const { return params_; }
  int training_count() const { return (int)x_.rows(); }

  // posterior mean and standard deviation at a batch of points
  void predict(const std::vector<Vec3>& queries, std::vector<double>& mean,
               std::vector<double>& std_dev) const {
    const int m = (int)x_.rows();
    mean.resize(queries.size());
    std_dev.resize(queries.size());
    Eigen::VectorXd k(m);
    for (size_t q = 0; q < queries.size(); ++q) {
      fill_kvec(queries[q], k);
      mean[q] = k.dot(alpha_);
      const Eigen::VectorXd v = llt_.matrixL().solve(k);
      const double var = kernel(0.0) - v.squaredNorm();
      std_dev[q] = std::sqrt(std::max(var, 0.0));
    }
  }

  // mean only; skips the O(m^2) per-query variance solve
  void predict_mean(const std::vector<Vec3>& queries, std::vector<double>& mean) const {
    const int m = (int)x_.rows();
    (void)m;
    mean.resize(queries.size());
    Eigen::VectorXd k(x_.rows());
    for (size_t q = 0; q < queries.size(); ++q) {
      fill_kvec(queries[q], k);
      mean[q] = k.dot(alpha_);
    }
  }

  std::pair<double, double> predict_one(const Vec3& q) const {
    std::vector<double> m, s;
    predict({q}, m, s);
    return {m[0], s[0]};
  }

 private:
  void fill_kvec(const Vec3& q, Eigen::VectorXd& k) const {
    for (int i = 0; i < (int)x_.rows(); ++i) {
      const double dx = x_(i, 0) - q.x;
      const double dy = x_(i, 1) - q.y;
      const double dz = x_(i, 2) - q.z;
      k(i) = kernel(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  GpisParams params_;
};

// Builds the augmented training set from an oriented surface cloud,
// downsampling to max_surface_points first (GP cost grows cubically).
inline GpisModel gpis_fit(const PointCloud& surface, const GpisParams& params = {}) {
  if (surface.empty()) throw std::invalid_argument("gpis_fit: empty cloud");
  if (!surface.has_normals()) throw std::invalid_argument("gpis_fit: normals required");

  std::vector<int> keep(surface.size());
  for (size_t i = 0; i < keep.size(); ++i) keep[i] = (int)i;
  if ((int)surface.size() > params.max_surface_points) {
    Rng rng(params.seed);
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(params.max_surface_points);
    std::sort(keep.begin(), keep.end());
  }

  const int s = (int)keep.size();
  Eigen::MatrixXd inputs(3 * s, 3);
  Eigen::VectorXd targets(3 * s);
  for (int i = 0; i < s; ++i) {
    const Vec3& p = surface.points[keep[i]];
    const Vec3& nv = surface.normals[keep[i]];
    const Vec3 outside = p + nv * params.offset;
    const Vec3 inside = p - nv * params.offset;
    inputs.row(i) << p.x, p.y, p.z;
    targets(i) = 0.0;
    inputs.row(s + i) << outside.x, outside.y, outside.z;
    targets(s + i) = params.offset;
    inputs.row(2 * s + i) << inside.x, inside.y, inside.z;
    targets(2 * s + i) = -params.offset;
  }
  return GpisModel(std::move(inputs), std::move(targets), params);
}

inline void gpis_predict(const GpisModel& model, const std::vector<Vec3>& queries,
                         std::vector<double>& mean, std::vector<double>& std_dev) {
  model.predict(queries, mean, std_dev);
}

// Zero level set of the posterior mean. An all-positive or all-negative mean
// yields an empty mesh; callers flag that case.
inline TriangleMesh gpis_surface(const GpisModel& model, const Aabb& bbox, int resolution,
                                 bool close_boundary = true) {
  const int n = resolution + 1;
  std::vector<Vec3> corners;
  corners.reserve((size_t)n * n * n);
  const Vec3 ext = bbox.extent();
  const Vec3 step{ext.x / resolution, ext.y / resolution, ext.z / resolution};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        corners.push_back(bbox.lo + Vec3{i * step.x, j * step.y, k * step.z});
  std::vector<double> mean;
  model.predict_mean(corners, mean);
  MarchingCubesOptions opts;
  opts.close_boundary = close_boundary;
  return marching_cubes_grid(std::move(mean), bbox, {resolution, resolution, resolution}, opts);
}

}  // namespace vhrec
