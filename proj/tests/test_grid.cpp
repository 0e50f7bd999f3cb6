#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hf/errors.hpp"
#include "hf/grid.hpp"
#include "test_support.hpp"

namespace hf {
namespace {

constexpr double kVolume = 2.0 * std::numbers::pi * std::numbers::pi;

// Monte Carlo estimate of |S^3| = 4 |B^4| from uniform samples in [-1, 1]^4.
double monte_carlo_sphere_volume(int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int inside = 0;
  for (int s = 0; s < samples; ++s) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a * a + b * b + c * c + d * d <= 1.0) ++inside;
  }
  return 4.0 * 16.0 * static_cast<double>(inside) / samples;
}

TEST(Grid, RejectsBadCounts) {
  EXPECT_THROW(Grid(2, 8, 16), InvalidArgument);
  EXPECT_THROW(Grid(8, 3, 16), InvalidArgument);
  EXPECT_THROW(Grid(7, 8, 16), InvalidArgument);
  EXPECT_THROW(Grid(8, 8, 15), InvalidArgument);
}

TEST(Grid, NodeCountAndParametrization) {
  const auto g = build_grid(8, 8, 16);
  EXPECT_EQ(g->size(), 1024u);
  const double b1 = g->beta(0);
  const Quaternion q = g->node(g->index(0, 0, 0));
  EXPECT_NEAR(q.w, std::cos(b1 / 2), 1e-15);
  EXPECT_NEAR(q.x, 0.0, 1e-15);
  EXPECT_NEAR(q.y, std::sin(b1 / 2), 1e-15);
  EXPECT_NEAR(q.z, 0.0, 1e-15);
  for (const auto& n : g->nodes()) EXPECT_NEAR(n.norm2(), 1.0, 1e-12);
  for (std::size_t n = 0; n < g->size(); ++n) EXPECT_GT(std::abs(g->frame_change(n).determinant()), 1e-10);
}

TEST(Grid, QuadratureMatchesMonteCarloVolume) {
  const double mc = monte_carlo_sphere_volume(2'000'000, 7);
  // Binomial standard error of the estimate is about 0.02.
  EXPECT_NEAR(mc, kVolume, 0.1);
  for (int nb : {8, 12, 16}) {
    const auto g = build_grid(16, nb, 32);
    const double vol = g->integrate(ScalarField(g->size(), 1.0));
    EXPECT_NEAR(vol, mc, 0.1);
    EXPECT_NEAR(vol, kVolume, 1e-8) << "n_beta = " << nb;
  }
}

TEST(Grid, IntegrateZeroAndOddFunctions) {
  const auto g = build_grid(16, 16, 32);
  EXPECT_EQ(g->integrate(ScalarField(g->size(), 0.0)), 0.0);
  EXPECT_NEAR(g->integrate(g->sample([](const Quaternion& q) { return q.w; })), 0.0, 1e-8);
  // <w^2> = 1/4 over the round sphere.
  EXPECT_NEAR(g->integrate(g->sample([](const Quaternion& q) { return q.w * q.w; })), kVolume / 4, 1e-10);
  EXPECT_THROW(g->integrate(ScalarField(3, 1.0)), InvalidArgument);
}

TEST(Grid, DerivativeOfConstantVanishes) {
  const auto g = build_grid(8, 8, 16);
  for (int a = 1; a <= 3; ++a) {
    const auto d = g->frame_derivative(ScalarField(g->size(), 3.5), a);
    for (double v : d) EXPECT_NEAR(v, 0.0, 1e-12);
  }
  EXPECT_THROW(g->frame_derivative(ScalarField(g->size(), 0.0), 4), InvalidArgument);
}

TEST(Grid, DerivativeIsLinear) {
  const auto g = build_grid(8, 8, 16);
  std::mt19937_64 rng(3);
  const auto f = g->sample(testing_support::random_polynomial(rng, 3));
  const auto h = g->sample(testing_support::random_polynomial(rng, 3));
  ScalarField sum(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) sum[n] = f[n] + h[n];
  for (int a = 1; a <= 3; ++a) {
    const auto df = g->frame_derivative(f, a), dh = g->frame_derivative(h, a), ds = g->frame_derivative(sum, a);
    for (std::size_t n = 0; n < f.size(); ++n) EXPECT_NEAR(ds[n], df[n] + dh[n], 1e-12);
  }
}

TEST(Grid, FrameDerivativeMatchesFlowLineDifference) {
  const auto g = build_grid(16, 16, 32);
  auto w_component = [](const Quaternion& q) { return q.w; };
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, g->size() - 1);
  for (int a = 1; a <= 3; ++a) {
    const auto d = g->frame_derivative(g->sample(w_component), a);
    for (int s = 0; s < 50; ++s) {
      const std::size_t n = pick(rng);
      const double oracle = testing_support::flow_line_derivative(w_component, g->node(n), a, 1e-4);
      EXPECT_NEAR(d[n], oracle, 1e-5) << "axis " << a << " node " << n;
    }
  }
}

TEST(Grid, LeftInvariantBracketIdentity) {
  const auto g = build_grid(16, 16, 32);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = g->sample(testing_support::random_polynomial(rng, 3));
    const auto e = g->frame_derivatives(f);
    std::array<std::array<ScalarField, 3>, 3> ee;
    for (int a = 0; a < 3; ++a) ee[a] = g->frame_derivatives(e[a]);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      for (std::size_t n = 0; n < f.size(); ++n) {
        // [E_a, E_b] f = E_a(E_b f) - E_b(E_a f) = 2 E_c f
        worst = std::max(worst, std::abs(ee[b][a][n] - ee[a][b][n] - 2.0 * e[c][n]));
      }
    }
    EXPECT_LT(worst, 1e-4) << "trial " << trial;
  }
}

TEST(BandLimiter, KeepsLowModesAndIsIdempotent) {
  const auto g = build_grid(16, 16, 32);
  BandLimiter limiter(g, 2);
  // Quadratic polynomials lie in j <= 1.
  std::mt19937_64 rng(9);
  const auto f = g->sample(testing_support::random_polynomial(rng, 2));
  const auto pf = limiter.apply(f);
  for (std::size_t n = 0; n < f.size(); ++n) EXPECT_NEAR(pf[n], f[n], 1e-11);

  const auto h = g->sample(testing_support::random_polynomial(rng, 7));
  const auto ph = limiter.apply(h);
  const auto pph = limiter.apply(ph);
  double moved = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    EXPECT_NEAR(pph[n], ph[n], 1e-11);
    moved = std::max(moved, std::abs(ph[n] - h[n]));
  }
  EXPECT_GT(moved, 1e-3);
}

TEST(BandLimiter, RejectsUnresolvedBand) {
  const auto g = build_grid(8, 8, 16);
  EXPECT_THROW(BandLimiter(g, 4), InvalidArgument);
  EXPECT_EQ(BandLimiter::auto_band(*g), 2);
  EXPECT_EQ(BandLimiter::auto_band(*build_grid(16, 16, 32)), 4);
}

}  // namespace
}  // namespace hf
