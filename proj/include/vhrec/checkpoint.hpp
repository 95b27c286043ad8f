#pragma once

#include <cstring>
#include <fstream>

#include "vhrec/train.hpp"

namespace vhrec {

namespace detail {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail

// Versioned binary checkpoint: architecture, parameters, all training
// latents, and normalization metadata. Parameters are stored in double
// regardless of the runtime scalar type.
inline void save_checkpoint(const TrainedModel<double>& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out.write("VHRECKP1", 8);
  detail::put<uint32_t>(out, 1);  // version
  const DecoderArch& a = model.state.arch;
  detail::put<int32_t>(out, a.layers);
  detail::put<int32_t>(out, a.hidden);
  detail::put<int32_t>(out, a.skip_layer);
  detail::put<int32_t>(out, a.latent_dim);
  detail::put<double>(out, a.beta);
  for (int l = 0; l < a.layers; ++l) {
    detail::put<int32_t>(out, a.out_dim(l));
    detail::put<int32_t>(out, a.in_dim(l));
    out.write(reinterpret_cast<const char*>(model.state.weights[l].data()),
              model.state.weights[l].size() * sizeof(double));
    out.write(reinterpret_cast<const char*>(model.state.biases[l].data()),
              model.state.biases[l].size() * sizeof(double));
  }
  detail::put<uint32_t>(out, (uint32_t)model.latents.size());
  for (const auto& z : model.latents)
    out.write(reinterpret_cast<const char*>(z.data()), z.size() * sizeof(double));
  detail::put<uint32_t>(out, (uint32_t)model.shape_ids.size());
  for (const auto& id : model.shape_ids) {
    detail::put<uint32_t>(out, (uint32_t)id.size());
    out.write(id.data(), id.size());
  }
  detail::put<double>(out, model.normalized_extent);
  detail::put<double>(out, model.loss.lambda);
  detail::put<double>(out, model.loss.tau);
  detail::put<double>(out, model.loss.gamma);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline TrainedModel<double> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "VHRECKP1", 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const uint32_t version = detail::get<uint32_t>(in);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  DecoderArch a;
  a.layers = detail::get<int32_t>(in);
  a.hidden = detail::get<int32_t>(in);
  a.skip_layer = detail::get<int32_t>(in);
  a.latent_dim = detail::get<int32_t>(in);
  a.beta = detail::get<double>(in);
  a.validate();
  TrainedModel<double> model;
  model.state = DecoderState<double>::zeros(a);
  for (int l = 0; l < a.layers; ++l) {
    const int rows = detail::get<int32_t>(in);
    const int cols = detail::get<int32_t>(in);
    if (rows != a.out_dim(l) || cols != a.in_dim(l))
      throw std::runtime_error("checkpoint layer shape mismatch");
    in.read(reinterpret_cast<char*>(model.state.weights[l].data()),
            model.state.weights[l].size() * sizeof(double));
    in.read(reinterpret_cast<char*>(model.state.biases[l].data()),
            model.state.biases[l].size() * sizeof(double));
  }
  const uint32_t n_latents = detail::get<uint32_t>(in);
  model.latents.assign(n_latents, std::vector<double>(a.latent_dim));
  for (auto& z : model.latents)
    in.read(reinterpret_cast<char*>(z.data()), z.size() * sizeof(double));
  const uint32_t n_ids = detail::get<uint32_t>(in);
  model.shape_ids.resize(n_ids);
  for (auto& id : model.shape_ids) {
    const uint32_t len = detail::get<uint32_t>(in);
    id.resize(len);
    in.read(id.data(), len);
  }
  model.normalized_extent = detail::get<double>(in);
  model.loss.lambda = detail::get<double>(in);
  model.loss.tau = detail::get<double>(in);
  model.loss.gamma = detail::get<double>(in);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return model;
}

}  // namespace vhrec
