#pragma once

#include "vhrec/train.hpp"

namespace vhrec {

struct InferConfig {
  int steps = 800;       // G
  int store_every = 50;  // L; every L-th code is kept as a shape sample
  double alpha = 1e-3;   // halved at 50% and again at 75% of the budget
  double init_sigma = 1e-3;
  LossConfig loss;       // gamma applies here
  uint64_t seed = 0;
};

template <typename S>
struct InferResult {
  std::vector<std::vector<S>> stored;  // codes at steps L, 2L, ...
  std::vector<S> final_code;
  LossTerms initial_terms;  // full-cloud terms before the first step
  LossTerms final_terms;    // full-cloud terms after the last step
};

// Plain gradient descent on the latent code over mini-batches of the cloud
// (the code update itself has no momentum; randomness enters only through
// batch sampling). Starts from warm_start when given, otherwise from a small
// Gaussian draw.
template <typename S>
InferResult<S> infer_latent(const PointCloud& cloud, const TrainedModel<S>& model,
                            const InferConfig& cfg,
                            const std::vector<S>* warm_start = nullptr) {
  if (cfg.steps < 1) throw std::invalid_argument("infer_latent: steps must be >= 1");
  if (cfg.store_every < 1 || cfg.store_every > cfg.steps)
    throw std::invalid_argument("infer_latent: store interval must be in [1, steps]");
  cloud.validate();
  const DecoderArch& arch = model.state.arch;

  Rng rng(cfg.seed);
  InferResult<S> res;
  if (warm_start) {
    if ((int)warm_start->size() != arch.latent_dim)
      throw std::invalid_argument("infer_latent: warm start size mismatch");
    res.final_code = *warm_start;
  } else {
    std::normal_distribution<double> n01(0.0, 1.0);
    res.final_code.resize(arch.latent_dim);
    for (S& v : res.final_code) v = (S)(cfg.init_sigma * n01(rng));
  }

  const std::vector<double> sigmas = knn_sigmas(cloud, cfg.loss.sigma_knn);
  {
    Rng eval_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    const LossBatch<S> full = make_full_batch<S>(cloud, sigmas, cfg.loss, eval_rng);
    res.initial_terms = loss_terms(full, res.final_code, model.state, cfg.loss, true);
  }

  std::vector<S> gz;
  std::vector<S>& z = res.final_code;
  for (int g = 1; g <= cfg.steps; ++g) {
    const LossBatch<S> batch = make_minibatch<S>(cloud, sigmas, cfg.loss, rng);
    loss_latent_gradient(batch, z, model.state, cfg.loss, true, gz);
    const double a =
        g <= cfg.steps / 2 ? cfg.alpha : (g <= 3 * cfg.steps / 4 ? cfg.alpha / 2 : cfg.alpha / 4);
    for (int k = 0; k < arch.latent_dim; ++k) z[k] -= (S)a * gz[k];
    if (g % cfg.store_every == 0) res.stored.push_back(z);
  }

  {
    Rng eval_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    const LossBatch<S> full = make_full_batch<S>(cloud, sigmas, cfg.loss, eval_rng);
    res.final_terms = loss_terms(full, z, model.state, cfg.loss, true);
  }
  return res;
}

}  // namespace vhrec
