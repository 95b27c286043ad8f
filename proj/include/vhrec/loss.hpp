#pragma once

#include "vhrec/decoder.hpp"
#include "vhrec/kdtree.hpp"
#include "vhrec/pointcloud.hpp"

namespace vhrec {

// Loss weights and batch shaping. The reconstruction loss is
//   mean_c(|f| + tau_c * |grad f - n_c|) + lambda * mean_e((|grad f| - 1)^2)
// with the Eikonal expectation taken over a declared sample set: half
// uniform in the box, half data points perturbed by per-point Gaussian noise
// sized by the distance to the sigma_knn-th neighbor. Latent inference adds
// gamma * |z|.
struct LossConfig {
  double lambda = 0.1;
  double tau = 1.0;          // 0 or 1, global normal-term toggle
  double gamma = 0.01;
  int data_batch = 128;
  int eikonal_batch = 128;
  double box_lo = -1.1;
  double box_hi = 1.1;
  int sigma_knn = 50;
  bool haptic_normals = true;  // when false, touch points get tau_c = 0
};

struct LossTerms {
  double total = 0, data = 0, normal = 0, eikonal = 0;
};

template <typename S>
struct LossBatch {
  std::vector<std::array<S, 3>> points;
  std::vector<std::array<S, 3>> normals;  // empty when the normal term is off
  std::vector<S> tau;                     // per-point weight, empty = all 1
  std::vector<std::array<S, 3>> eikonal_points;

  bool use_normals() const { return !normals.empty(); }
};

// Distance to the k-th nearest neighbor for every point; local noise scale
// for the Eikonal samples.
inline std::vector<double> knn_sigmas(const PointCloud& cloud, int k) {
  std::vector<double> sigmas(cloud.size(), 0.1);
  if (cloud.size() < 2) return sigmas;
  const KdTree tree(cloud.points);
  const int kk = std::min<int>(k + 1, (int)cloud.size());  // +1: self included
  for (size_t i = 0; i < cloud.size(); ++i) {
    const auto nn = tree.knearest(cloud.points[i], kk);
    sigmas[i] = std::sqrt(nn.back().second);
  }
  return sigmas;
}

namespace detail {

template <typename S>
inline void push_point(LossBatch<S>& batch, const PointCloud& cloud,
                       const std::vector<double>& sigmas, const LossConfig& cfg, size_t i) {
  (void)sigmas;
  const Vec3& p = cloud.points[i];
  batch.points.push_back({(S)p.x, (S)p.y, (S)p.z});
  if (cfg.tau != 0.0) {
    const Vec3& n = cloud.normals[i];
    batch.normals.push_back({(S)n.x, (S)n.y, (S)n.z});
    const bool drop = !cfg.haptic_normals && cloud.sources[i] == PointSource::Haptic;
    batch.tau.push_back(drop ? S(0) : S(cfg.tau));
  }
}

template <typename S>
inline void fill_eikonal(LossBatch<S>& batch, const PointCloud& cloud,
                         const std::vector<double>& sigmas, const LossConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> ubox(cfg.box_lo, cfg.box_hi);
  std::uniform_int_distribution<size_t> upick(0, cloud.size() - 1);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int n_uniform = cfg.eikonal_batch / 2;
  for (int e = 0; e < cfg.eikonal_batch; ++e) {
    if (e < n_uniform) {
      batch.eikonal_points.push_back({(S)ubox(rng), (S)ubox(rng), (S)ubox(rng)});
    } else {
      const size_t i = upick(rng);
      const double s = sigmas[i];
      batch.eikonal_points.push_back({(S)(cloud.points[i].x + s * n01(rng)),
                                      (S)(cloud.points[i].y + s * n01(rng)),
                                      (S)(cloud.points[i].z + s * n01(rng))});
    }
  }
}

}  // namespace detail

// Mini-batch: cfg.data_batch points drawn uniformly with replacement.
template <typename S>
LossBatch<S> make_minibatch(const PointCloud& cloud, const std::vector<double>& sigmas,
                            const LossConfig& cfg, Rng& rng) {
  if (cloud.empty()) throw std::invalid_argument("loss batch: empty cloud");
  if (cfg.tau != 0.0 && !cloud.has_normals())
    throw std::invalid_argument("normal term requested but cloud has no normals");
  LossBatch<S> batch;
  std::uniform_int_distribution<size_t> upick(0, cloud.size() - 1);
  for (int i = 0; i < cfg.data_batch; ++i)
    detail::push_point(batch, cloud, sigmas, cfg, upick(rng));
  detail::fill_eikonal(batch, cloud, sigmas, cfg, rng);
  return batch;
}

// Full batch: every cloud point once, in order.
template <typename S>
LossBatch<S> make_full_batch(const PointCloud& cloud, const std::vector<double>& sigmas,
                             const LossConfig& cfg, Rng& rng) {
  if (cloud.empty()) throw std::invalid_argument("loss batch: empty cloud");
  if (cfg.tau != 0.0 && !cloud.has_normals())
    throw std::invalid_argument("normal term requested but cloud has no normals");
  LossBatch<S> batch;
  for (size_t i = 0; i < cloud.size(); ++i) detail::push_point(batch, cloud, sigmas, cfg, i);
  detail::fill_eikonal(batch, cloud, sigmas, cfg, rng);
  return batch;
}

// Loss terms only. `latent_reg` switches the gamma |z| addition used during
// latent inference.
template <typename S>
LossTerms loss_terms(const LossBatch<S>& batch, const std::vector<S>& z,
                     const DecoderState<S>& st, const LossConfig& cfg, bool latent_reg = false) {
  if ((int)z.size() != st.arch.latent_dim) throw std::invalid_argument("latent size mismatch");
  if (batch.points.empty()) throw std::invalid_argument("loss: empty batch");
  DecoderWorkspace<S> ws(st.arch);
  LossTerms t;
  S g[3];
  for (size_t i = 0; i < batch.points.size(); ++i) {
    const S f = decoder_spatial_gradient(st, batch.points[i].data(), z.data(), g, ws);
    t.data += std::abs((double)f);
    if (batch.use_normals()) {
      const auto& n = batch.normals[i];
      const double dx = g[0] - n[0], dy = g[1] - n[1], dz = g[2] - n[2];
      t.normal += (double)batch.tau[i] * std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  t.data /= (double)batch.points.size();
  t.normal /= (double)batch.points.size();
  for (const auto& p : batch.eikonal_points) {
    decoder_spatial_gradient(st, p.data(), z.data(), g, ws);
    const double r = std::sqrt((double)(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]));
    t.eikonal += (r - 1.0) * (r - 1.0);
  }
  if (!batch.eikonal_points.empty()) t.eikonal /= (double)batch.eikonal_points.size();
  t.total = t.data + t.normal + cfg.lambda * t.eikonal;
  if (latent_reg && cfg.gamma > 0) {
    double zn = 0;
    for (S v : z) zn += (double)v * (double)v;
    t.total += cfg.gamma * std::sqrt(zn);
  }
  return t;
}

// Loss terms plus exact gradients with respect to theta and z, including the
// second-order path through the gradient-norm terms. gtheta may be null when
// only the latent gradient is needed. Optional outputs gx_data and gx_eikonal
// receive per-point d(loss)/dx.
template <typename S>
LossTerms loss_gradients_impl(const LossBatch<S>& batch, const std::vector<S>& z,
                              const DecoderState<S>& st, const LossConfig& cfg, bool latent_reg,
                              DecoderGrad<S>* gtheta, std::vector<S>& gz,
                              std::vector<std::array<S, 3>>* gx_data = nullptr,
                              std::vector<std::array<S, 3>>* gx_eikonal = nullptr) {
  if ((int)z.size() != st.arch.latent_dim) throw std::invalid_argument("latent size mismatch");
  if (batch.points.empty()) throw std::invalid_argument("loss: empty batch");
  DecoderWorkspace<S> ws(st.arch);
  if (gtheta) gtheta->zero();
  gz.assign(st.arch.latent_dim, S(0));
  if (gx_data) gx_data->assign(batch.points.size(), {S(0), S(0), S(0)});
  if (gx_eikonal) gx_eikonal->assign(batch.eikonal_points.size(), {S(0), S(0), S(0)});

  LossTerms t;
  const S inv_c = S(1) / (S)batch.points.size();
  S g[3];
  for (size_t i = 0; i < batch.points.size(); ++i) {
    const S f = decoder_spatial_gradient(st, batch.points[i].data(), z.data(), g, ws);
    t.data += std::abs((double)f);
    const S s_f = (f > S(0) ? inv_c : (f < S(0) ? -inv_c : S(0)));
    S w[3] = {S(0), S(0), S(0)};
    if (batch.use_normals() && batch.tau[i] != S(0)) {
      const auto& n = batch.normals[i];
      const S dx = g[0] - n[0], dy = g[1] - n[1], dz = g[2] - n[2];
      const S r = std::sqrt(dx * dx + dy * dy + dz * dz);
      t.normal += (double)batch.tau[i] * (double)r;
      if (r > S(0)) {
        const S c = batch.tau[i] * inv_c / r;
        w[0] = c * dx;
        w[1] = c * dy;
        w[2] = c * dz;
      }
    }
    decoder_accumulate_gradient(st, ws, s_f, w, gtheta, gz.data(),
                                gx_data ? (*gx_data)[i].data() : nullptr);
  }
  t.data /= (double)batch.points.size();
  t.normal /= (double)batch.points.size();

  if (!batch.eikonal_points.empty()) {
    const S scale = (S)(cfg.lambda / (double)batch.eikonal_points.size());
    for (size_t i = 0; i < batch.eikonal_points.size(); ++i) {
      decoder_spatial_gradient(st, batch.eikonal_points[i].data(), z.data(), g, ws);
      const S r = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
      t.eikonal += ((double)r - 1.0) * ((double)r - 1.0);
      if (r > S(0)) {
        const S c = scale * S(2) * (r - S(1)) / r;
        const S w[3] = {c * g[0], c * g[1], c * g[2]};
        decoder_accumulate_gradient(st, ws, S(0), w, gtheta, gz.data(),
                                    gx_eikonal ? (*gx_eikonal)[i].data() : nullptr);
      }
    }
    t.eikonal /= (double)batch.eikonal_points.size();
  }

  t.total = t.data + t.normal + cfg.lambda * t.eikonal;
  if (latent_reg && cfg.gamma > 0) {
    double zn = 0;
    for (S v : z) zn += (double)v * (double)v;
    const double r = std::sqrt(zn);
    t.total += cfg.gamma * r;
    if (r > 0)
      for (int k = 0; k < st.arch.latent_dim; ++k) gz[k] += (S)(cfg.gamma / r) * z[k];
  }
  return t;
}

// Full gradient, theta and z.
template <typename S>
LossTerms loss_gradients(const LossBatch<S>& batch, const std::vector<S>& z,
                         const DecoderState<S>& st, const LossConfig& cfg, bool latent_reg,
                         DecoderGrad<S>& gtheta, std::vector<S>& gz,
                         std::vector<std::array<S, 3>>* gx_data = nullptr,
                         std::vector<std::array<S, 3>>* gx_eikonal = nullptr) {
  return loss_gradients_impl(batch, z, st, cfg, latent_reg, &gtheta, gz, gx_data, gx_eikonal);
}

// Latent-only gradient; skips the parameter accumulation work.
template <typename S>
LossTerms loss_latent_gradient(const LossBatch<S>& batch, const std::vector<S>& z,
                               const DecoderState<S>& st, const LossConfig& cfg, bool latent_reg,
                               std::vector<S>& gz) {
  return loss_gradients_impl<S>(batch, z, st, cfg, latent_reg, nullptr, gz);
}

// Spec-level convenience: full-cloud loss with a seeded Eikonal sample set.
template <typename S>
LossTerms reconstruction_loss(const PointCloud& cloud, const std::vector<S>& z,
                              const DecoderState<S>& st, const LossConfig& cfg,
                              uint64_t seed = 0) {
  Rng rng(seed);
  const std::vector<double> sigmas = knn_sigmas(cloud, cfg.sigma_knn);
  const LossBatch<S> batch = make_full_batch<S>(cloud, sigmas, cfg, rng);
  return loss_terms(batch, z, st, cfg, false);
}

}  // namespace vhrec
