#pragma once

#include <atomic>
#include <thread>

#include "vhrec/loss.hpp"

namespace vhrec {

struct TrainConfig {
  DecoderArch arch;
  int iterations = 3500;
  int batch_shapes = 8;
  LossConfig loss;
  double theta_step = 5e-4;
  double latent_step = 1e-3;
  double momentum = 0.9;
  double latent_init_sigma = 1e-3;
  uint64_t seed = 0;
  int threads = 1;  // shape-batch parallelism; reduction order stays fixed
};

struct TraceRow {
  int iteration = 0;
  double total = 0, data = 0, normal = 0, eikonal = 0;
};

template <typename S>
struct TrainedModel {
  DecoderState<S> state;
  std::vector<std::vector<S>> latents;  // one per training shape
  std::vector<std::string> shape_ids;
  double normalized_extent = 2.0;  // training clouds span this along their longest axis
  LossConfig loss;
};

template <typename S, typename T>
TrainedModel<T> convert_model(const TrainedModel<S>& in) {
  TrainedModel<T> out;
  out.state = DecoderState<T>::zeros(in.state.arch);
  for (size_t l = 0; l < in.state.weights.size(); ++l) {
    for (size_t i = 0; i < in.state.weights[l].size(); ++i)
      out.state.weights[l][i] = (T)in.state.weights[l][i];
    for (size_t i = 0; i < in.state.biases[l].size(); ++i)
      out.state.biases[l][i] = (T)in.state.biases[l][i];
  }
  out.latents.resize(in.latents.size());
  for (size_t j = 0; j < in.latents.size(); ++j)
    out.latents[j].assign(in.latents[j].begin(), in.latents[j].end());
  out.shape_ids = in.shape_ids;
  out.normalized_extent = in.normalized_extent;
  out.loss = in.loss;
  return out;
}

class TrainDivergence : public std::runtime_error {
 public:
  TrainDivergence(const std::string& what, std::vector<TraceRow> trace_)
      : std::runtime_error(what), trace(std::move(trace_)) {}
  std::vector<TraceRow> trace;
};

template <typename S>
struct TrainResult {
  TrainedModel<S> model;
  std::vector<TraceRow> trace;
};

// Joint descent on theta and all per-shape latent codes with momentum.
// Deterministic for a fixed seed: batches are drawn before any parallel
// work and gradients are reduced in shape order.
template <typename S>
TrainResult<S> train_multishape(const std::vector<std::pair<PointCloud, std::string>>& dataset,
                                const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train_multishape: empty dataset");
  cfg.arch.validate();
  for (const auto& [cloud, id] : dataset) {
    cloud.validate();
    if (cloud.empty()) throw std::invalid_argument("train_multishape: empty cloud " + id);
  }

  Rng rng(cfg.seed);
  TrainResult<S> result;
  result.model.state = DecoderState<S>::geometric_init(cfg.arch, rng());
  result.model.loss = cfg.loss;
  std::normal_distribution<double> n01(0.0, 1.0);
  const int J = (int)dataset.size();
  result.model.latents.resize(J);
  for (auto& z : result.model.latents) {
    z.resize(cfg.arch.latent_dim);
    for (S& v : z) v = (S)(cfg.latent_init_sigma * n01(rng));
  }
  for (const auto& [cloud, id] : dataset) result.model.shape_ids.push_back(id);

  std::vector<std::vector<double>> sigmas(J);
  for (int j = 0; j < J; ++j) sigmas[j] = knn_sigmas(dataset[j].first, cfg.loss.sigma_knn);

  DecoderState<S>& st = result.model.state;
  DecoderGrad<S> vtheta(cfg.arch);  // momentum buffers
  std::vector<std::vector<S>> vz(J, std::vector<S>(cfg.arch.latent_dim, S(0)));

  const int B = cfg.batch_shapes;
  const int threads = std::max(1, cfg.threads);
  std::vector<DecoderGrad<S>> gtheta(B, DecoderGrad<S>(cfg.arch));
  std::vector<std::vector<S>> gz(B);
  std::vector<LossTerms> terms(B);
  std::uniform_int_distribution<int> pick(0, J - 1);

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    std::vector<int> shapes(B);
    std::vector<LossBatch<S>> batches(B);
    for (int b = 0; b < B; ++b) {
      shapes[b] = pick(rng);
      batches[b] =
          make_minibatch<S>(dataset[shapes[b]].first, sigmas[shapes[b]], cfg.loss, rng);
    }

    auto work = [&](int b) {
      terms[b] = loss_gradients(batches[b], result.model.latents[shapes[b]], st, cfg.loss,
                                false, gtheta[b], gz[b]);
    };
    if (threads <= 1 || B == 1) {
      for (int b = 0; b < B; ++b) work(b);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      for (int w = 0; w < std::min(threads, B); ++w)
        pool.emplace_back([&] {
          for (int b = next.fetch_add(1); b < B; b = next.fetch_add(1)) work(b);
        });
      for (auto& th : pool) th.join();
    }

    TraceRow row;
    row.iteration = iter;
    const S inv_b = S(1) / (S)B;
    for (int b = 0; b < B; ++b) {
      row.total += terms[b].total;
      row.data += terms[b].data;
      row.normal += terms[b].normal;
      row.eikonal += terms[b].eikonal;
      // latent update per sampled shape
      const int j = shapes[b];
      for (int k = 0; k < cfg.arch.latent_dim; ++k) {
        vz[j][k] = (S)cfg.momentum * vz[j][k] - (S)cfg.latent_step * gz[b][k];
        result.model.latents[j][k] += vz[j][k];
      }
    }
    row.total /= B;
    row.data /= B;
    row.normal /= B;
    row.eikonal /= B;
    result.trace.push_back(row);
    if (!std::isfinite(row.total))
      throw TrainDivergence("training diverged at iteration " + std::to_string(iter),
                            result.trace);

    for (int l = 0; l < cfg.arch.layers; ++l) {
      for (size_t i = 0; i < st.weights[l].size(); ++i) {
        S g = S(0);
        for (int b = 0; b < B; ++b) g += gtheta[b].weights[l][i];
        vtheta.weights[l][i] =
            (S)cfg.momentum * vtheta.weights[l][i] - (S)cfg.theta_step * g * inv_b;
        st.weights[l][i] += vtheta.weights[l][i];
      }
      for (size_t i = 0; i < st.biases[l].size(); ++i) {
        S g = S(0);
        for (int b = 0; b < B; ++b) g += gtheta[b].biases[l][i];
        vtheta.biases[l][i] =
            (S)cfg.momentum * vtheta.biases[l][i] - (S)cfg.theta_step * g * inv_b;
        st.biases[l][i] += vtheta.biases[l][i];
      }
    }
  }
  return result;
}

}  // namespace vhrec
