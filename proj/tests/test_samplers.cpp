// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "subgeo/chain_library.hpp"
#include "subgeo/samplers.hpp"

namespace {

using namespace subgeo;

SimConfig rwm_config(int d, double tau) {
  SimConfig c;
  c.kernel = KernelKind::rwm;
  c.target.family = Family::student_t;
  c.target.d = d;
  c.target.tau = tau;
  return c;
}

std::vector<double> final_states(const Ensemble& e, int coord = 0) {
  std::vector<double> out;
  for (const auto& r : e.replicas) out.push_back(r.x[r.x.size() - std::size_t(e.dim) + std::size_t(coord)]);
  return out;
}

TEST(Rng, ReplicaStreamsAreDistinctAndReproducible) {
  Rng a = replica_rng(1, 0), b = replica_rng(1, 1), a2 = replica_rng(1, 0);
  const auto x = a(), y = b();
  EXPECT_NE(x, y);
  EXPECT_EQ(x, a2());
  Rng r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open(r);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rwm, DeterministicUnderSeed) {
  SimConfig c = rwm_config(2, 5);
  c.n_steps = 500;
  c.n_replicas = 3;
  const Ensemble a = run_rwm(c), b = run_rwm(c);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(a.replicas[r].x, b.replicas[r].x);
  c.seed = 2;
  EXPECT_NE(run_rwm(c).replicas[0].x, a.replicas[0].x);
}

TEST(Rwm, StationaryStudentTMarginal) {
  SimConfig c = rwm_config(1, 5);
  c.n_steps = 200;
  c.n_replicas = 1000;
  const Ensemble e = run_rwm(c);
  const boost::math::students_t T(5.0);
  const KsResult ks = ks_test(final_states(e), [&](double x) { return boost::math::cdf(T, x); });
  EXPECT_GT(ks.p_value, 1e-3) << ks.statistic;
}

TEST(Rwm, ExactDrawsMatchStudentT) {
  TargetSpec t;
  t.family = Family::student_t;
  t.d = 3;
  t.tau = 5;
  Rng rng(4);
  std::vector<double> xs;
  double x[3];
  for (int i = 0; i < 5000; ++i) {
    sample_target(t, rng, x);
    xs.push_back(x[1]);
  }
  // Marginals of the multivariate t are univariate t with the same dof.
  const boost::math::students_t T(5.0);
  EXPECT_GT(ks_test(xs, [&](double v) { return boost::math::cdf(T, v); }).p_value, 1e-3);
}

TEST(Rwm, FarStartStaysFinite) {
  SimConfig c = rwm_config(2, 5);
  c.init = InitKind::point;
  c.init_point = {1e150, -1e150};
  c.n_steps = 1000;
  const Ensemble e = run_rwm(c);
  for (double v : e.replicas[0].x) EXPECT_TRUE(std::isfinite(v));
}

TEST(Jump, StationaryLawAndJumpRate) {
  SimConfig c;
  c.kernel = KernelKind::jump;
  c.n_steps = 300;
  c.n_replicas = 2000;
  const double a = 4, b = 1, k = a - b - 1;
  const Ensemble e = run_jump_chain(a, b, c);
  // mu(x) = k x^{-(k+1)} on [1, inf): log x ~ Exp(k).
  const KsResult ks = ks_test(final_states(e), [&](double l) { return l <= 0 ? 0.0 : 1 - std::exp(-k * l); });
  EXPECT_GT(ks.p_value, 1e-3) << ks.statistic;
  // Stationary jump rate mu(w) = k / (k + b).
  EXPECT_NEAR(e.acceptance(), k / (k + b), 0.01);
}

TEST(Imh, ExactProposalNeverRejects) {
  SimConfig c = rwm_config(2, 5);
  c.kernel = KernelKind::imh;
  c.n_steps = 2000;
  const Ensemble e = run_imh(c);
  EXPECT_EQ(e.replicas[0].accepts, c.n_steps);
  EXPECT_EQ(e.replicas[0].longest_rejection_streak, 0u);
  // A Gaussian proposal for a heavy target must hold somewhere.
  c.imh_scale = 1.0;
  const Ensemble g = run_imh(c);
  EXPECT_LT(g.acceptance(), 1.0);
  EXPECT_GT(g.replicas[0].longest_rejection_streak, 0u);
}

TEST(PseudoMarginal, LightWeightsApproachRwm) {
  SimConfig c = rwm_config(2, 5);
  c.kernel = KernelKind::pm_rwm;
  c.n_steps = 20000;
  c.n_replicas = 4;
  c.weights.kind = WeightSpec::Kind::pareto;
  c.weights.alpha = 200;
  const double pm = run_pm(c).acceptance();
  const double rw = run_rwm(c).acceptance();
  EXPECT_NEAR(pm, rw, 0.02);
  c.weights.alpha = 1.5;
  EXPECT_LT(run_pm(c).acceptance(), rw - 0.05);
}

TEST(PseudoMarginal, StationaryWeightsAreSizeBiased) {
  SimConfig c = rwm_config(2, 5);
  c.kernel = KernelKind::pm_rwm;
  c.weights.kind = WeightSpec::Kind::pareto;
  c.weights.alpha = 2.5;
  c.n_steps = 100;
  c.n_replicas = 2000;
  const Ensemble e = run_pm(c);
  std::vector<double> w;
  for (const auto& r : e.replicas) w.push_back(r.weight.back());
  const double xm = 1 - 1 / 2.5;
  const KsResult ks =
      ks_test(w, [&](double s) { return s <= xm ? 0.0 : 1 - std::pow(xm / s, 1.5); });
  EXPECT_GT(ks.p_value, 1e-3) << ks.statistic;
}

TEST(Config, Validation) {
  SimConfig c = rwm_config(2, 5);
  c.thin = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = rwm_config(2, 5);
  c.init = InitKind::point;
  c.init_point = {1.0};
  EXPECT_THROW(c.validate(), ValidationError);
  c = SimConfig{};
  c.kernel = KernelKind::jump;
  c.jump_b = 3;
  EXPECT_THROW(c.validate(), ValidationError);
  c = rwm_config(2, 5);
  c.kernel = KernelKind::pm_rwm;
  c.weights.kind = WeightSpec::Kind::discrete;
  c.weights.atoms = {1.0, 2.0};
  c.weights.probs = {0.5, 0.5};
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(NestedDecay, IndependentChainDecaysAtOnce) {
  const FiniteChain c = independent_chain(uniform_law(4));
  NestedOptions o;
  o.outer = 64;
  o.inner = 64;
  const DecayEstimate e = empirical_decay(c, indicator(4, 0b0011), {0, 1, 2}, o);
  EXPECT_NEAR(e.points[0].value, 0.25, 0.1);
  EXPECT_NEAR(e.points[1].value, 0.0, 1e-15);
  EXPECT_NEAR(e.points[2].value, 0.0, 1e-15);
}

TEST(NestedDecay, FiniteChainMatchesExact) {
  std::mt19937_64 rng(8);
  const FiniteChain c = random_reversible_chain(5, rng);
  const Eigen::VectorXd f = indicator(5, 0b00101);
  const auto exact = exact_decay(c, f, 8);
  NestedOptions o;
  o.outer = 256;
  o.inner = 128;
  const DecayEstimate e = empirical_decay(c, f, {1, 2, 4, 8}, o);
  int inside = 0;
  for (const auto& p : e.points) {
    const double v = exact.values[std::size_t(p.n)];
    // Widen the percentile interval by two standard errors of slack.
    if (v >= p.lo - 2 * p.se && v <= p.hi + 2 * p.se) ++inside;
  }
  EXPECT_EQ(inside, 4);
}

TEST(NestedDecay, JumpChainExponentNearFormula) {
  JumpDecayOptions jo;
  jo.nested.outer = 128;
  jo.nested.inner = 128;
  std::vector<int> grid;
  for (double n = 16; n <= 4096; n *= 1.5) grid.push_back(int(n));
  const DecayEstimate e = empirical_decay_jump(4, 1, grid, jo);
  // (a - b - 1) / b = 2 for the squared norm.
  EXPECT_NEAR(decay_exponent(e.points).slope, 2.0, 0.4);
  EXPECT_THROW(empirical_decay_jump(4, 3, grid, jo), ValidationError);
}

TEST(BatchMeans, IidAndAutoregressive) {
  Rng rng(11);
  std::normal_distribution<double> N;
  std::vector<double> iid(250000), ar(250000);
  const double rho = 0.6;
  double x = N(rng) / std::sqrt(1 - rho * rho);
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = N(rng);
    x = rho * x + N(rng);
    ar[i] = x;
  }
  const AsvarEstimate a = batch_means_asvar(iid);
  EXPECT_LE(a.lo, 1.0);
  EXPECT_GE(a.hi, 1.0);
  // Spectral density at zero of AR(1) with unit innovations: 1 / (1 - rho)^2.
  const AsvarEstimate b = batch_means_asvar(ar);
  EXPECT_NEAR(b.value, 1 / ((1 - rho) * (1 - rho)), 0.2 * b.value);
  EXPECT_THROW(batch_means_asvar(std::vector<double>(500, 0.0)), ValidationError);
}

TEST(Ks, KolmogorovTailValues) {
  // Tabulated critical value: P(K > 1.358) = 0.05.
  EXPECT_NEAR(kolmogorov_tail(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_tail(1.6276), 0.01, 1e-4);
  EXPECT_EQ(kolmogorov_tail(0.0), 1.0);
}

}  // namespace
