#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "vhrec/core.hpp"

namespace vhrec {

// Conditioned implicit decoder f(x; theta, z): an MLP over the concatenated
// input u0 = [x, z] with softplus activations and one skip connection that
// re-concatenates u0. Geometric initialization makes the untrained network
// approximate the signed distance to a unit sphere (negative inside).
struct DecoderArch {
  int layers = 8;       // weight layers
  int hidden = 128;
  int skip_layer = 4;   // this layer's input is [h, u0]; 0 disables the skip
  int latent_dim = 64;
  double beta = 100.0;  // softplus sharpness

  int base_in() const { return 3 + latent_dim; }
  int in_dim(int l) const {
    if (l == 0) return base_in();
    return l == skip_layer ? hidden + base_in() : hidden;
  }
  int out_dim(int l) const { return l == layers - 1 ? 1 : hidden; }

  void validate() const {
    if (layers < 1) throw std::invalid_argument("decoder needs at least 1 layer");
    if (hidden < 1 || latent_dim < 0 || beta <= 0)
      throw std::invalid_argument("bad decoder architecture");
    if (skip_layer < 0 || skip_layer >= layers)
      throw std::invalid_argument("skip layer index out of range");
  }

  bool operator==(const DecoderArch& o) const {
    return layers == o.layers && hidden == o.hidden && skip_layer == o.skip_layer &&
           latent_dim == o.latent_dim && beta == o.beta;
  }
};

namespace detail {

template <typename S>
inline void matvec(const S* w, int rows, int cols, const S* x, const S* bias, S* out) {
  for (int r = 0; r < rows; ++r) {
    const S* wr = w + (size_t)r * cols;
    S acc = bias ? bias[r] : S(0);
#pragma omp simd reduction(+ : acc)
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

// out += w^T * s
template <typename S>
inline void matvec_transposed_acc(const S* w, int rows, int cols, const S* s, S* out) {
  for (int r = 0; r < rows; ++r) {
    const S v = s[r];
    const S* wr = w + (size_t)r * cols;
#pragma omp simd
    for (int c = 0; c < cols; ++c) out[c] += wr[c] * v;
  }
}

// dw += s * u^T
template <typename S>
inline void outer_acc(S* dw, int rows, int cols, const S* s, const S* u) {
  for (int r = 0; r < rows; ++r) {
    const S v = s[r];
    if (v == S(0)) continue;
    S* dr = dw + (size_t)r * cols;
#pragma omp simd
    for (int c = 0; c < cols; ++c) dr[c] += v * u[c];
  }
}

// Numerically stable softplus value plus first and second derivatives.
template <typename S>
inline void softplus(S a, S beta, S& h, S& d1, S& d2) {
  const S t = beta * a;
  const S cut = sizeof(S) == 8 ? S(34) : S(15);
  if (t > cut) {
    h = a;
    d1 = S(1);
    d2 = S(0);
  } else if (t < -cut) {
    h = S(0);
    d1 = S(0);
    d2 = S(0);
  } else {
    const S e = std::exp(t);
    const S sig = e / (S(1) + e);
    h = std::log1p(e) / beta;
    d1 = sig;
    d2 = beta * sig * (S(1) - sig);
  }
}

}  // namespace detail

template <typename S>
struct DecoderState {
  DecoderArch arch;
  std::vector<std::vector<S>> weights;  // row-major, [out x in] per layer
  std::vector<std::vector<S>> biases;

  static DecoderState zeros(const DecoderArch& arch) {
    arch.validate();
    DecoderState s;
    s.arch = arch;
    s.weights.resize(arch.layers);
    s.biases.resize(arch.layers);
    for (int l = 0; l < arch.layers; ++l) {
      s.weights[l].assign((size_t)arch.out_dim(l) * arch.in_dim(l), S(0));
      s.biases[l].assign(arch.out_dim(l), S(0));
    }
    return s;
  }

  // Geometric initialization: hidden weights ~ N(0, 2/fan_out); the columns
  // reading the latent code (and the re-injected skip input) start at zero;
  // the output layer starts as an averaging head with bias -1 so that
  // f(x, 0) is approximately |x| - 1.
  static DecoderState geometric_init(const DecoderArch& arch, uint64_t seed) {
    DecoderState s = zeros(arch);
    Rng rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int l = 0; l < arch.layers; ++l) {
      const int rows = arch.out_dim(l);
      const int cols = arch.in_dim(l);
      if (l == arch.layers - 1) {
        const double mean = std::sqrt(M_PI) / std::sqrt((double)cols);
        for (auto& w : s.weights[l]) w = (S)(mean + 1e-5 * n01(rng));
        for (auto& b : s.biases[l]) b = (S)(-1.0);
        continue;
      }
      const double sigma = std::sqrt(2.0) / std::sqrt((double)rows);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          const double v = sigma * n01(rng);
          const bool latent_col = (l == 0 && c >= 3) || (l == arch.skip_layer && c >= arch.hidden);
          s.weights[l][(size_t)r * cols + c] = latent_col ? S(0) : (S)v;
        }
    }
    return s;
  }

  size_t param_count() const {
    size_t n = 0;
    for (int l = 0; l < arch.layers; ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  // Flat parameter view, weights of each layer followed by its biases; used
  // by the optimizer and by finite-difference checks.
  S& param(size_t i) {
    for (int l = 0; l < arch.layers; ++l) {
      if (i < weights[l].size()) return weights[l][i];
      i -= weights[l].size();
      if (i < biases[l].size()) return biases[l][i];
      i -= biases[l].size();
    }
    throw std::out_of_range("decoder parameter index");
  }
  const S& param(size_t i) const { return const_cast<DecoderState*>(this)->param(i); }
};

// Mirror of the parameter layout for gradient accumulation.
template <typename S>
struct DecoderGrad {
  std::vector<std::vector<S>> weights;
  std::vector<std::vector<S>> biases;

  explicit DecoderGrad(const DecoderArch& arch) {
    weights.resize(arch.layers);
    biases.resize(arch.layers);
    for (int l = 0; l < arch.layers; ++l) {
      weights[l].assign((size_t)arch.out_dim(l) * arch.in_dim(l), S(0));
      biases[l].assign(arch.out_dim(l), S(0));
    }
  }

  void zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), S(0));
    for (auto& b : biases) std::fill(b.begin(), b.end(), S(0));
  }

  void scale(S s) {
    for (auto& w : weights)
      for (auto& v : w) v *= s;
    for (auto& b : biases)
      for (auto& v : b) v *= s;
  }

  void add(const DecoderGrad& o) {
    for (size_t l = 0; l < weights.size(); ++l) {
      for (size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += o.weights[l][i];
      for (size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += o.biases[l][i];
    }
  }

  S& param(size_t i) {
    for (size_t l = 0; l < weights.size(); ++l) {
      if (i < weights[l].size()) return weights[l][i];
      i -= weights[l].size();
      if (i < biases[l].size()) return biases[l][i];
      i -= biases[l].size();
    }
    throw std::out_of_range("decoder gradient index");
  }
};

// Scratch buffers for one point's forward, gradient, and second-order
// passes. Reused across points; never shared between threads.
template <typename S>
struct DecoderWorkspace {
  std::vector<std::vector<S>> u, a, d1, d2, du, da, dh;
  std::vector<S> rh, rdh, ra, rda, ru, rdu, u0grad;

  explicit DecoderWorkspace(const DecoderArch& arch) {
    const int L = arch.layers;
    u.resize(L);
    a.resize(L);
    d1.resize(L);
    d2.resize(L);
    du.resize(L);
    da.resize(L);
    dh.resize(L);
    for (int l = 0; l < L; ++l) {
      u[l].resize(arch.in_dim(l));
      du[l].resize(arch.in_dim(l));
      a[l].resize(arch.out_dim(l));
      da[l].resize(arch.out_dim(l));
      d1[l].resize(arch.out_dim(l));
      d2[l].resize(arch.out_dim(l));
      dh[l].resize(arch.out_dim(l));
    }
    const int m = std::max(arch.hidden + arch.base_in(), arch.base_in());
    rh.resize(m);
    rdh.resize(m);
    ra.resize(m);
    rda.resize(m);
    ru.resize(m);
    rdu.resize(m);
    u0grad.resize(arch.base_in());
  }
};

namespace detail {

// Forward pass; fills u, a and the activation derivatives. Returns f.
template <typename S>
inline S decoder_forward_ws(const DecoderState<S>& st, const S* x, const S* z,
                            DecoderWorkspace<S>& ws) {
  const DecoderArch& arch = st.arch;
  const int L = arch.layers;
  const int nb = arch.base_in();
  S* u0 = ws.u[0].data();
  for (int k = 0; k < 3; ++k) u0[k] = x[k];
  for (int k = 0; k < arch.latent_dim; ++k) u0[3 + k] = z[k];

  for (int l = 0; l < L; ++l) {
    if (l > 0) {
      S* ul = ws.u[l].data();
      const S* a_prev = ws.a[l - 1].data();
      S h, d1v, d2v;
      for (int k = 0; k < arch.hidden; ++k) {
        softplus(a_prev[k], (S)arch.beta, h, d1v, d2v);
        ul[k] = h;
        ws.d1[l - 1][k] = d1v;
        ws.d2[l - 1][k] = d2v;
      }
      if (l == arch.skip_layer)
        for (int k = 0; k < nb; ++k) ul[arch.hidden + k] = u0[k];
    }
    matvec(st.weights[l].data(), arch.out_dim(l), arch.in_dim(l), ws.u[l].data(),
           st.biases[l].data(), ws.a[l].data());
  }
  return ws.a[L - 1][0];
}

// Reverse pass for df/du0; requires a prior decoder_forward_ws call.
// u0grad receives [df/dx, df/dz].
template <typename S>
inline void decoder_input_gradient_ws(const DecoderState<S>& st, DecoderWorkspace<S>& ws) {
  const DecoderArch& arch = st.arch;
  const int L = arch.layers;
  const int nb = arch.base_in();
  std::fill(ws.u0grad.begin(), ws.u0grad.end(), S(0));
  // ws.ra holds df/da of the current layer
  ws.ra[0] = S(1);
  for (int l = L - 1; l >= 0; --l) {
    std::fill(ws.ru.begin(), ws.ru.begin() + arch.in_dim(l), S(0));
    matvec_transposed_acc(st.weights[l].data(), arch.out_dim(l), arch.in_dim(l), ws.ra.data(),
                          ws.ru.data());
    if (l == 0) {
      for (int k = 0; k < nb; ++k) ws.u0grad[k] += ws.ru[k];
      break;
    }
    if (l == arch.skip_layer)
      for (int k = 0; k < nb; ++k) ws.u0grad[k] += ws.ru[arch.hidden + k];
    for (int k = 0; k < arch.hidden; ++k) ws.ra[k] = ws.ru[k] * ws.d1[l - 1][k];
  }
}

}  // namespace detail

// f at a single point. The batch overloads below evaluate points one at a
// time through this same code path, so batch and single calls agree exactly.
template <typename S>
inline S decoder_forward(const DecoderState<S>& st, const S* x, const S* z,
                         DecoderWorkspace<S>& ws) {
  return detail::decoder_forward_ws(st, x, z, ws);
}

template <typename S>
inline void decoder_forward_batch(const DecoderState<S>& st, const std::vector<std::array<S, 3>>& xs,
                                  const std::vector<S>& z, std::vector<S>& out) {
  if ((int)z.size() != st.arch.latent_dim) throw std::invalid_argument("latent size mismatch");
  DecoderWorkspace<S> ws(st.arch);
  out.resize(xs.size());
  for (size_t i = 0; i < xs.size(); ++i)
    out[i] = detail::decoder_forward_ws(st, xs[i].data(), z.data(), ws);
}

// Analytic spatial gradient, one point. Returns f; writes grad = df/dx.
template <typename S>
inline S decoder_spatial_gradient(const DecoderState<S>& st, const S* x, const S* z, S grad[3],
                                  DecoderWorkspace<S>& ws) {
  const S f = detail::decoder_forward_ws(st, x, z, ws);
  detail::decoder_input_gradient_ws(st, ws);
  for (int k = 0; k < 3; ++k) grad[k] = ws.u0grad[k];
  return f;
}

template <typename S>
inline void decoder_spatial_gradient_batch(const DecoderState<S>& st,
                                           const std::vector<std::array<S, 3>>& xs,
                                           const std::vector<S>& z,
                                           std::vector<std::array<S, 3>>& grads) {
  if ((int)z.size() != st.arch.latent_dim) throw std::invalid_argument("latent size mismatch");
  DecoderWorkspace<S> ws(st.arch);
  grads.resize(xs.size());
  for (size_t i = 0; i < xs.size(); ++i)
    decoder_spatial_gradient(st, xs[i].data(), z.data(), grads[i].data(), ws);
}

// Accumulates the parameter and latent gradient of the scalar
//   phi = f_coeff * f(x)  +  dot(g_coeff, grad_x f(x))
// into gtheta and gz. The second term needs the second-order path: a forward
// tangent sweep along g_coeff followed by a reverse sweep through both the
// tangent and primal variables. Requires a prior decoder_forward_ws call.
// gtheta may be null for latent-only descent; gx, when non-null, receives
// d(phi)/dx.
template <typename S>
inline void decoder_accumulate_gradient(const DecoderState<S>& st, DecoderWorkspace<S>& ws,
                                        S f_coeff, const S g_coeff[3], DecoderGrad<S>* gtheta,
                                        S* gz, S* gx = nullptr) {
  const DecoderArch& arch = st.arch;
  const int L = arch.layers;
  const int nb = arch.base_in();
  const bool with_tangent = g_coeff != nullptr &&
                            (g_coeff[0] != S(0) || g_coeff[1] != S(0) || g_coeff[2] != S(0));

  if (with_tangent) {
    // tangent sweep: du0 = [g_coeff, 0]
    S* du0 = ws.du[0].data();
    for (int k = 0; k < 3; ++k) du0[k] = g_coeff[k];
    for (int k = 3; k < nb; ++k) du0[k] = S(0);
    for (int l = 0; l < L; ++l) {
      if (l > 0) {
        S* dul = ws.du[l].data();
        const S* dh_prev = ws.dh[l - 1].data();
        for (int k = 0; k < arch.hidden; ++k) dul[k] = dh_prev[k];
        if (l == arch.skip_layer)
          for (int k = 0; k < nb; ++k) dul[arch.hidden + k] = du0[k];
      }
      detail::matvec(st.weights[l].data(), arch.out_dim(l), arch.in_dim(l), ws.du[l].data(),
                     (const S*)nullptr, ws.da[l].data());
      if (l < L - 1)
        for (int k = 0; k < arch.hidden; ++k) ws.dh[l][k] = ws.d1[l][k] * ws.da[l][k];
    }
  }

  // reverse sweep; ra = d(phi)/da_l, rda = d(phi)/d(da_l)
  std::fill(ws.u0grad.begin(), ws.u0grad.end(), S(0));
  ws.ra[0] = f_coeff;
  ws.rda[0] = with_tangent ? S(1) : S(0);
  for (int l = L - 1; l >= 0; --l) {
    const int rows = arch.out_dim(l);
    const int cols = arch.in_dim(l);
    if (gtheta) {
      detail::outer_acc(gtheta->weights[l].data(), rows, cols, ws.ra.data(), ws.u[l].data());
      for (int r = 0; r < rows; ++r) gtheta->biases[l][r] += ws.ra[r];
      if (with_tangent)
        detail::outer_acc(gtheta->weights[l].data(), rows, cols, ws.rda.data(), ws.du[l].data());
    }

    // propagate to layer inputs
    std::fill(ws.ru.begin(), ws.ru.begin() + cols, S(0));
    detail::matvec_transposed_acc(st.weights[l].data(), rows, cols, ws.ra.data(), ws.ru.data());
    if (with_tangent) {
      std::fill(ws.rdu.begin(), ws.rdu.begin() + cols, S(0));
      detail::matvec_transposed_acc(st.weights[l].data(), rows, cols, ws.rda.data(),
                                    ws.rdu.data());
    }

    if (l == 0) {
      for (int k = 0; k < nb; ++k) ws.u0grad[k] += ws.ru[k];
      break;
    }
    if (l == arch.skip_layer)
      for (int k = 0; k < nb; ++k) ws.u0grad[k] += ws.ru[arch.hidden + k];

    // through h = softplus(a) and dh = d1 * da of the previous layer
    const auto& d1p = ws.d1[l - 1];
    const auto& d2p = ws.d2[l - 1];
    const auto& dap = ws.da[l - 1];
    for (int k = 0; k < arch.hidden; ++k) {
      const S rh = ws.ru[k];
      const S rdh = with_tangent ? ws.rdu[k] : S(0);
      ws.ra[k] = d1p[k] * rh + (with_tangent ? d2p[k] * dap[k] * rdh : S(0));
      ws.rda[k] = with_tangent ? d1p[k] * rdh : S(0);
    }
  }

  if (gz)
    for (int k = 0; k < arch.latent_dim; ++k) gz[k] += ws.u0grad[3 + k];
  // d(phi)/dx flows entirely through the primal input slot; the tangent
  // slot carries the constant g_coeff and contributes nothing to it.
  if (gx)
    for (int k = 0; k < 3; ++k) gx[k] += ws.u0grad[k];
}

}  // namespace vhrec
