#pragma once

#include "vhrec/decoder.hpp"
#include "vhrec/marching_cubes.hpp"

namespace vhrec {

struct ReconstructOptions {
  int resolution = 40;
  bool close_boundary = true;
  // Skip 4^3-cell blocks whose corner values all sit further from zero than
  // safety * half the block diagonal. Sound when f is approximately a signed
  // distance (the Eikonal term enforces |grad f| near 1); set sparse = false
  // for exact dense evaluation.
  bool sparse = true;
  double safety = 2.0;
};

// Zero level set of the conditioned decoder over the box.
template <typename S>
TriangleMesh reconstruct_mesh(const DecoderState<S>& st, const std::vector<S>& z,
                              const Aabb& bbox, const ReconstructOptions& opts = {}) {
  if ((int)z.size() != st.arch.latent_dim) throw std::invalid_argument("latent size mismatch");
  const int res = opts.resolution;
  if (res < 2) throw std::invalid_argument("reconstruct_mesh: resolution must be >= 2");
  const int n = res + 1;
  DecoderWorkspace<S> ws(st.arch);
  const Vec3 ext = bbox.extent();
  const Vec3 step{ext.x / res, ext.y / res, ext.z / res};
  // canonical per-axis coordinates so every evaluation order feeds the
  // decoder bit-identical inputs
  std::vector<S> xs(n), ys(n), zs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = (S)(bbox.lo.x + i * step.x);
    ys[i] = (S)(bbox.lo.y + i * step.y);
    zs[i] = (S)(bbox.lo.z + i * step.z);
  }
  auto eval = [&](int i, int j, int k) {
    const S x[3] = {xs[i], ys[j], zs[k]};
    return (double)decoder_forward(st, x, z.data(), ws);
  };

  std::vector<double> values((size_t)n * n * n);
  if (!opts.sparse) {
    size_t idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) values[idx++] = eval(i, j, k);
    return marching_cubes_grid(std::move(values), bbox,
                               {res, res, res}, {opts.close_boundary});
  }

  constexpr int B = 4;  // cells per block edge
  const int nb = (res + B - 1) / B;
  auto corner_of_block = [&](int bi) { return std::min(bi * B, res); };
  std::vector<char> evaluated((size_t)n * n * n, 0);
  auto at = [&](int i, int j, int k) -> size_t { return ((size_t)i * n + j) * n + k; };
  auto eval_once = [&](int i, int j, int k) {
    const size_t id = at(i, j, k);
    if (!evaluated[id]) {
      values[id] = eval(i, j, k);
      evaluated[id] = 1;
    }
    return values[id];
  };

  const double half_diag =
      0.5 * std::sqrt(std::pow(B * step.x, 2) + std::pow(B * step.y, 2) + std::pow(B * step.z, 2));
  const double skip_threshold = opts.safety * half_diag;

  std::vector<char> refine((size_t)nb * nb * nb, 0);
  for (int bi = 0; bi < nb; ++bi)
    for (int bj = 0; bj < nb; ++bj)
      for (int bk = 0; bk < nb; ++bk) {
        double min_abs = std::numeric_limits<double>::infinity();
        double rep = 1.0;
        for (int c = 0; c < 8; ++c) {
          const int i = corner_of_block(bi + ((c >> 0) & 1));
          const int j = corner_of_block(bj + ((c >> 1) & 1));
          const int k = corner_of_block(bk + ((c >> 2) & 1));
          const double v = eval_once(i, j, k);
          if (std::abs(v) < min_abs) {
            min_abs = std::abs(v);
            rep = v;
          }
        }
        bool need = min_abs <= skip_threshold;
        // boundary capping cuts through negative blocks; keep those exact
        if (!need && opts.close_boundary && rep < 0 &&
            (bi == 0 || bj == 0 || bk == 0 || bi == nb - 1 || bj == nb - 1 || bk == nb - 1))
          need = true;
        if (need) refine[((size_t)bi * nb + bj) * nb + bk] = 1;
      }

  // exact values for every corner of a refined block
  for (int bi = 0; bi < nb; ++bi)
    for (int bj = 0; bj < nb; ++bj)
      for (int bk = 0; bk < nb; ++bk) {
        if (!refine[((size_t)bi * nb + bj) * nb + bk]) continue;
        for (int i = corner_of_block(bi); i <= corner_of_block(bi + 1); ++i)
          for (int j = corner_of_block(bj); j <= corner_of_block(bj + 1); ++j)
            for (int k = corner_of_block(bk); k <= corner_of_block(bk + 1); ++k) eval_once(i, j, k);
      }

  // fill the rest with a same-signed constant from the block bound
  for (int bi = 0; bi < nb; ++bi)
    for (int bj = 0; bj < nb; ++bj)
      for (int bk = 0; bk < nb; ++bk) {
        if (refine[((size_t)bi * nb + bj) * nb + bk]) continue;
        const double v0 = values[at(corner_of_block(bi), corner_of_block(bj), corner_of_block(bk))];
        const double fill = v0 < 0 ? -1.0 : 1.0;
        for (int i = corner_of_block(bi); i <= corner_of_block(bi + 1); ++i)
          for (int j = corner_of_block(bj); j <= corner_of_block(bj + 1); ++j)
            for (int k = corner_of_block(bk); k <= corner_of_block(bk + 1); ++k) {
              const size_t id = at(i, j, k);
              if (!evaluated[id]) {
                values[id] = fill;
                evaluated[id] = 1;
              }
            }
      }

  return marching_cubes_grid(std::move(values), bbox, {res, res, res}, {opts.close_boundary});
}

}  // namespace vhrec
