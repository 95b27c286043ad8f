#include <catch2/catch_amalgamated.hpp>

#include "vhrec/decoder.hpp"

using namespace vhrec;

namespace {

DecoderArch small_arch() {
  DecoderArch a;
  a.layers = 3;
  a.hidden = 16;
  a.skip_layer = 1;
  a.latent_dim = 8;
  a.beta = 50.0;
  return a;
}

void perturb_all(DecoderState<double>& st, Rng& rng, double sigma) {
  std::normal_distribution<double> n01(0.0, 1.0);
  for (size_t i = 0; i < st.param_count(); ++i) st.param(i) += sigma * n01(rng);
}

}  // namespace

TEST_CASE("zero decoder outputs its final bias") {
  DecoderArch arch = small_arch();
  DecoderState<double> st = DecoderState<double>::zeros(arch);
  st.biases.back()[0] = 0.73;
  std::vector<double> z(arch.latent_dim, 0.4);
  std::vector<std::array<double, 3>> xs = {{0.1, -0.2, 0.3}, {1, 2, 3}, {0, 0, 0}};
  std::vector<double> out;
  decoder_forward_batch(st, xs, z, out);
  for (double v : out) CHECK(v == 0.73);
}

TEST_CASE("batch evaluation matches single calls bit-exactly") {
  DecoderArch arch = small_arch();
  DecoderState<double> st = DecoderState<double>::geometric_init(arch, 11);
  Rng rng(3);
  perturb_all(st, rng, 0.1);
  std::vector<double> z(arch.latent_dim);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : z) v = u(rng);
  std::vector<std::array<double, 3>> xs;
  for (int i = 0; i < 17; ++i) xs.push_back({u(rng), u(rng), u(rng)});

  std::vector<double> batch_out;
  decoder_forward_batch(st, xs, z, batch_out);
  DecoderWorkspace<double> ws(arch);
  for (size_t i = 0; i < xs.size(); ++i) {
    const double single = decoder_forward(st, xs[i].data(), z.data(), ws);
    CHECK(batch_out[i] == single);
  }
}

TEST_CASE("fixed-seed initialization is reproducible") {
  DecoderArch arch = small_arch();
  const DecoderState<double> a = DecoderState<double>::geometric_init(arch, 99);
  const DecoderState<double> b = DecoderState<double>::geometric_init(arch, 99);
  REQUIRE(a.param_count() == b.param_count());
  for (size_t i = 0; i < a.param_count(); ++i) CHECK(a.param(i) == b.param(i));
}

TEST_CASE("geometric init approximates a unit sphere SDF") {
  DecoderArch arch;  // full desk-scale architecture
  DecoderState<double> st = DecoderState<double>::geometric_init(arch, 5);
  std::vector<double> z(arch.latent_dim, 0.0);
  DecoderWorkspace<double> ws(arch);
  const double x0[3] = {0, 0, 0};
  CHECK(decoder_forward(st, x0, z.data(), ws) < 0);
  for (const Vec3 dir : {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0.57735, 0.57735, 0.57735}}) {
    const double xo[3] = {1.5 * dir.x, 1.5 * dir.y, 1.5 * dir.z};
    CHECK(decoder_forward(st, xo, z.data(), ws) > 0);
  }
}

TEST_CASE("single linear layer has exact gradient w") {
  DecoderArch arch;
  arch.layers = 1;
  arch.hidden = 1;
  arch.skip_layer = 0;  // disabled
  arch.latent_dim = 2;
  DecoderState<double> st = DecoderState<double>::zeros(arch);
  const double w[3] = {0.3, -0.8, 0.5};
  for (int k = 0; k < 3; ++k) st.weights[0][k] = w[k];
  st.weights[0][3] = 0.7;  // latent weights must not leak into the x gradient
  st.biases[0][0] = 0.25;

  std::vector<double> z = {0.2, -0.1};
  DecoderWorkspace<double> ws(arch);
  const double x[3] = {0.4, 0.1, -0.9};
  double g[3];
  const double f = decoder_spatial_gradient(st, x, z.data(), g, ws);
  CHECK(f == Catch::Approx(w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + 0.7 * z[0] + 0.25));
  for (int k = 0; k < 3; ++k) CHECK(g[k] == w[k]);
}

TEST_CASE("zero decoder has zero spatial gradient") {
  DecoderArch arch = small_arch();
  DecoderState<double> st = DecoderState<double>::zeros(arch);
  std::vector<double> z(arch.latent_dim, 0.3);
  DecoderWorkspace<double> ws(arch);
  const double x[3] = {0.5, -0.5, 0.25};
  double g[3];
  decoder_spatial_gradient(st, x, z.data(), g, ws);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
}

TEST_CASE("spatial gradient matches central finite differences") {
  DecoderArch arch = small_arch();
  DecoderState<double> st = DecoderState<double>::geometric_init(arch, 17);
  Rng rng(23);
  perturb_all(st, rng, 0.15);
  std::vector<double> z(arch.latent_dim);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : z) v = u(rng);

  DecoderWorkspace<double> ws(arch);
  const double h = 1e-5;
  int checked = 0;
  for (int probe = 0; probe < 100; ++probe) {
    double x[3] = {u(rng), u(rng), u(rng)};
    double g[3];
    decoder_spatial_gradient(st, x, z.data(), g, ws);
    for (int k = 0; k < 3; ++k) {
      double xp[3] = {x[0], x[1], x[2]};
      xp[k] = x[k] + h;
      const double fp = decoder_forward(st, xp, z.data(), ws);
      xp[k] = x[k] - h;
      const double fm = decoder_forward(st, xp, z.data(), ws);
      const double fd = (fp - fm) / (2 * h);
      const double err = std::abs(fd - g[k]) / std::max({1.0, std::abs(fd), std::abs(g[k])});
      CHECK(err <= 1e-4);
      ++checked;
    }
  }
  CHECK(checked == 300);
}

TEST_CASE("forward and gradient are pure") {
  DecoderArch arch = small_arch();
  DecoderState<double> st = DecoderState<double>::geometric_init(arch, 31);
  std::vector<double> z(arch.latent_dim, 0.05);
  DecoderWorkspace<double> ws(arch);
  const double x[3] = {0.2, 0.3, -0.1};
  double g1[3], g2[3];
  const double f1 = decoder_spatial_gradient(st, x, z.data(), g1, ws);
  const double f2 = decoder_spatial_gradient(st, x, z.data(), g2, ws);
  CHECK(f1 == f2);
  for (int k = 0; k < 3; ++k) CHECK(g1[k] == g2[k]);
}

TEST_CASE("dimension mismatch is rejected") {
  DecoderArch arch = small_arch();
  DecoderState<double> st = DecoderState<double>::zeros(arch);
  std::vector<double> bad_z(arch.latent_dim + 1, 0.0);
  std::vector<std::array<double, 3>> xs = {{0, 0, 0}};
  std::vector<double> out;
  CHECK_THROWS_AS(decoder_forward_batch(st, xs, bad_z, out), std::invalid_argument);
}
