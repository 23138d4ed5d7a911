// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "subgeo/chain_library.hpp"
#include "subgeo/finite_chain.hpp"
#include "subgeo/weak_cheeger.hpp"

namespace {

using namespace subgeo;

// Trapezoid rule in log v with n nodes; test-side oracle for the integrals.
template <class F>
double log_trapezoid(F f, double a, double b, int n = 200000) {
  const double la = std::log(a), h = (std::log(b) - la) / n;
  double s = 0;
  for (int i = 0; i <= n; ++i) {
    const double v = std::exp(la + i * h);
    s += (i == 0 || i == n ? 0.5 : 1.0) * f(v) * v;
  }
  return s * h;
}

// Brute-force alpha_1 on a fine s grid.
double alpha1_oracle(const MonotoneFn& phi, double r) {
  double best = 0;
  for (int i = 0; i <= 20000; ++i) {
    const double s = r + (0.5 - r) * i / 20000.0;
    if (s > 0) best = std::max(best, (s - r) / (s * phi(s)));
  }
  return best;
}

TEST(L1Wpi, ConstantProfile) {
  const MonotoneFn phi = MonotoneFn::constant(0.5, Direction::increasing);
  const MonotoneFn a1 = wcp_to_l1wpi(phi);
  for (double r : {1e-4, 0.01, 0.1, 0.3, 0.49}) {
    EXPECT_NEAR(a1(r), 2 - 4 * r, 1e-12);
    EXPECT_NEAR(a1(r), alpha1_oracle(phi, r), 1e-9);
  }
  const MonotoneFn back = l1wpi_to_wcp(a1);
  for (double v : {0.01, 0.2, 0.5}) EXPECT_NEAR(back(v), 0.5, 1e-9);
}

TEST(L1Wpi, StaircaseMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FiniteChain c = random_reversible_chain(5, rng);
    const MonotoneFn phi = weak_conductance_exact(c).phi;
    const MonotoneFn a1 = wcp_to_l1wpi(phi);
    for (double r : {0.01, 0.05, 0.15, 0.3}) EXPECT_NEAR(a1(r), alpha1_oracle(phi, r), 1e-3 * a1(r));
    // Round trip never exceeds the original profile.
    const MonotoneFn back = l1wpi_to_wcp(a1);
    for (double v : {0.05, 0.2, 0.45}) EXPECT_LE(back(v), phi(v) * (1 + 1e-9));
  }
}

TEST(L1ToL2, ConstantAlpha) {
  const MonotoneFn a1 = MonotoneFn::constant(3.0);
  // inf over theta of 9 / (2 theta (1 - theta)) sits at theta = 1/2.
  EXPECT_NEAR(l1_to_l2_alpha(a1, 0.1), 18.0, 1e-9);
  EXPECT_NEAR(l1_to_l2_wpi(a1)(0.2), 18.0, 1e-9);
}

TEST(L1ToL2, PowerAlphaMatchesScan) {
  const MonotoneFn a1 = MonotoneFn::power(1.0, -1.0);
  for (double r : {0.01, 0.1}) {
    double best = kInf;
    for (int i = 1; i < 100000; ++i) {
      const double th = i / 100000.0;
      const double a = a1((1 - th) * r);
      best = std::min(best, a * a / (2 * th * (1 - th)));
    }
    EXPECT_NEAR(l1_to_l2_alpha(a1, r), best, 1e-6 * best);
  }
}

TEST(Kstar, ClosedBoundAndConstructiveOrdering) {
  const MonotoneFn phi = MonotoneFn::constant(0.5, Direction::increasing);
  const KstarFromWcp k = wcp_to_kstar(phi);
  for (double v : {0.01, 0.1, 0.25}) EXPECT_NEAR(k.closed(v), v / 16, 1e-15);
  EXPECT_GE(k.min_ratio, 1 - 1e-9);
}

TEST(KstarToWcp, PrintedConstantIsInvalid) {
  // Independent kernel on two equal states: Phi(1/2) = 1/2, and
  // E(f) = var(f) >= osc^2 K*(var/osc^2) holds with K*(v) = v.
  const FiniteChain c = independent_chain(uniform_law(2));
  const double phi_half = weak_conductance_exact(c).phi(0.5);
  EXPECT_NEAR(phi_half, 0.5, 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd f(2);
    f << N(rng), N(rng);
    const double o = osc(f);
    EXPECT_GE(dirichlet_form(c, f) + 1e-15, o * o * (variance(c.mu, f) / (o * o)));
  }
  const RateFn k = RateFn::power(1.0, 1.0, 0.25);
  EXPECT_LE(kstar_to_wcp(k)(0.5), phi_half + 1e-15);
  EXPECT_GT(kstar_to_wcp(k, WcpConstant::printed)(0.5), phi_half);
}

// Property: kstar_to_wcp(wcp_to_kstar(Phi)) <= Phi at every knot.
TEST(KstarToWcp, SandwichOnRandomChains) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 25; ++t) {
    const FiniteChain c = random_reversible_chain(4 + std::size_t(t % 3), rng);
    const WeakConductance w = weak_conductance_exact(c);
    const KstarFromWcp k = wcp_to_kstar(w.phi);
    const MonotoneFn back = kstar_to_wcp(k.constructive);
    for (double m : w.masses) EXPECT_LE(back(m), w.phi(m) * (1 + 1e-9)) << t;
  }
}

TEST(Mixing, ConstantProfile) {
  const MonotoneFn phi = MonotoneFn::constant(0.5, Direction::increasing);
  // 4 * 4 * log((1/16) / (eps/4)).
  EXPECT_NEAR(mixing_integral_value(phi, 0.01), 16 * std::log(25.0), 1e-9);
  EXPECT_EQ(mixing_integral(phi, 0.01), 52u);
  EXPECT_EQ(mixing_integral(phi, 0.3), 0u);
  EXPECT_THROW(mixing_integral(MonotoneFn::constant(0.0, Direction::increasing), 0.01), ValidationError);
}

// Property: the integral bound is sound on lazy reversible chains.
TEST(Mixing, SoundOnRandomLazyChains) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const FiniteChain c = random_reversible_chain(4 + std::size_t(t % 3), rng);
    const MonotoneFn phi = weak_conductance_exact(c).phi;
    for (double eps : {0.1, 0.01}) {
      const int n = int(mixing_integral(phi, eps));
      for (std::uint64_t m = 1; m + 1 < (1ull << c.size()); ++m) {
        const auto d = exact_decay(c, indicator(c.size(), m), n);
        EXPECT_LE(d.values.back(), eps);
      }
    }
  }
}

TEST(Sharpness, AnalyticFamilies) {
  const MonotoneFn flat = MonotoneFn::constant(0.3, Direction::increasing);
  EXPECT_NEAR(sharpness_ratio(flat, 0.01), 8.0, 1e-9);

  const double c = 0.7;
  const MonotoneFn lin = MonotoneFn::power(c, 1.0);
  const SharpnessReport r = sharpness_report(lin, 1e-3, true);
  auto g = [](double v) { return (1 - std::sqrt(1 - v / 8)) / 2; };
  const double old_o = 32 * log_trapezoid([&](double v) { return 1 / (v * c * c * g(v) * g(v)); }, 1e-3, 0.25);
  const double new_o = 4 * log_trapezoid([&](double v) { return 16 / (v * c * c * v * v); }, 1e-3, 0.25);
  EXPECT_NEAR(r.old_bound, old_o, 1e-6 * old_o);
  EXPECT_NEAR(r.new_bound, new_o, 1e-6 * new_o);
  EXPECT_TRUE(r.ok);
  EXPECT_GT(r.ratio, 500.0);

  for (double tau : {1.0, 2.0, 5.0})
    EXPECT_GE(sharpness_ratio(MonotoneFn::power(c, 1 / tau), 1e-3), 8.0);
  EXPECT_THROW(sharpness_ratio(flat, 0.3), ValidationError);
}

}  // namespace
