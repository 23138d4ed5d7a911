// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "subgeo/heavytail.hpp"
#include "subgeo/weak_cheeger.hpp"

namespace {

using namespace subgeo;

TargetSpec make(Family f, int d, double tau, double eta) {
  TargetSpec t;
  t.family = f;
  t.d = d;
  t.tau = tau;
  t.eta = eta;
  return t;
}

std::vector<TargetSpec> valid_targets() {
  std::vector<TargetSpec> out;
  for (int d : {3, 10, 50}) out.push_back(make(Family::student_t, d, 5, 1));
  for (int d : {2, 10, 50})
    for (double e : {1.0, 2.0, 5.0}) {
      out.push_back(make(Family::product_student, d, 1, e));
      out.push_back(make(Family::cauchy_type, d, 1, e));
    }
  for (int d : {2, 10, 50})
    for (double tau : {1.0, 2.0, 5.0}) out.push_back(make(Family::subexp_product, d, tau, 0.5));
  return out;
}

TEST(Smoothness, HessianNormBoundedByL) {
  const TargetSpec st = make(Family::student_t, 10, 5, 1);
  EXPECT_DOUBLE_EQ(smoothness_constant(st), 3.0);
  for (const TargetSpec& t : valid_targets()) {
    const double L = smoothness_constant(t);
    double mx = 0;
    for (int i = 0; i <= 20000; ++i) mx = std::max(mx, hessian_norm(t, 1e-3 * i));
    EXPECT_LE(mx, L * (1 + 1e-12)) << family_name(t.family);
    EXPECT_GE(mx, 0.99 * L) << family_name(t.family);
  }
}

TEST(Minorant, StudentXiPrecondition) {
  EXPECT_THROW(iso_minorant(make(Family::student_t, 2, 5, 1)), ValidationError);
  EXPECT_THROW(iso_minorant(make(Family::student_t, 10, 1, 1)), ValidationError);
  EXPECT_NO_THROW(iso_minorant(make(Family::student_t, 3, 5, 1)));
  TargetSpec bad = make(Family::subexp_product, 2, 1, 1.5);
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(RwmBound, KstarMatchesDirectFormula) {
  const double vs = 1.0;
  for (const TargetSpec& t : valid_targets()) {
    const RwmWcp w = rwm_wcp_bound(t, vs);
    const MonotoneFn I = iso_minorant(t).fn;
    const double L = smoothness_constant(t), d = t.d;
    const double a = std::pow(2.0, -6) * vs * std::exp(-vs * vs) / std::sqrt(L * d);
    const double b = std::pow(2.0, -11) * vs * vs * std::exp(-2 * vs * vs) / (L * d);
    for (double v : {1e-4, 0.01, 0.2}) {
      EXPECT_NEAR(w.phi(v), a * I(v / 2) / (v / 2), 1e-12 * w.phi(v));
      EXPECT_NEAR(w.kstar(v), b * I(v / 8) * I(v / 8) / (v / 8), 1e-12 * w.kstar(v));
    }
    // The K* bound is the closed lower bound of the Phi-to-K* conversion
    // scaled by the coupling constants; it must not exceed v Phi(v/4)^2 / 4
    // times 2^-11 / 2^-12.
    for (double v : {1e-3, 0.1}) EXPECT_LE(w.kstar(v), 2 * v * w.phi(v / 4) * w.phi(v / 4) / 4 * (1 + 1e-12));
  }
}

TEST(RwmMixing, ClosedFormMatchesQuadrature) {
  for (const TargetSpec& t : valid_targets())
    for (double eps : {1e-1, 1e-3})
      for (double u : {1.0, 10.0}) {
        const MixingReport r = rwm_mixing_time(t, 1.0, eps, u);
        ASSERT_TRUE(r.closed_form.has_value());
        EXPECT_NEAR(*r.closed_form, r.bound, 1e-6 * r.bound) << family_name(t.family) << " d=" << t.d;
        EXPECT_GE(*r.display, r.bound * (1 - 1e-9));
        if (!r.n_saturated) {
          EXPECT_EQ(r.n_bound, std::uint64_t(std::ceil(r.bound)));
        }
      }
}

// Property: the bound grows with u and d and shrinks with eps.
TEST(RwmMixing, Monotonicity) {
  for (const TargetSpec& t : valid_targets()) {
    double prev = 0;
    for (double u : {1.0, 2.0, 10.0, 100.0}) {
      const double b = rwm_mixing_time(t, 1.0, 1e-2, u).bound;
      EXPECT_GE(b, prev);
      prev = b;
    }
    prev = kInf;
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
      const double b = rwm_mixing_time(t, 1.0, eps, 1).bound;
      EXPECT_LE(b, prev);
      prev = b;
    }
  }
  for (Family f : {Family::product_student, Family::cauchy_type, Family::subexp_product}) {
    double prev = 0;
    for (int d : {2, 4, 8, 16, 32}) {
      const double b = rwm_mixing_time(make(f, d, 2, 0.5), 1.0, 1e-3, 1).bound;
      EXPECT_GE(b, prev);
      prev = b;
    }
  }
}

TEST(RwmMixing, EmptyRangeAndRejections) {
  const TargetSpec t = make(Family::cauchy_type, 2, 1, 1);
  EXPECT_EQ(rwm_mixing_time(t, 1.0, 1.0, 1.0).n_bound, 1u);
  EXPECT_THROW(rwm_mixing_time(t, 1.0, 0.0, 1.0), ValidationError);
  EXPECT_THROW(rwm_mixing_time(t, 1.0, 0.1, 0.5), ValidationError);
  EXPECT_THROW(rwm_mixing_time(make(Family::student_t, 2, 1, 1), 1.0, 0.1, 1), ValidationError);
}

TEST(AsymVariance, PowerRates) {
  const AsymVarBound b = asym_variance_bound(RateFn::power(1.0, 1.5, 0.25), 1.0, 0.1);
  // B(v) = int_0^v w^{-1/2} dw = 2 sqrt(v).
  EXPECT_NEAR(b.value, 8 * std::sqrt(0.1), 1e-6);
  EXPECT_FALSE(b.divergent);
  EXPECT_TRUE(asym_variance_bound(RateFn::power(1.0, 2.0, 0.25), 1.0, 0.1).divergent);
  EXPECT_EQ(asym_variance_bound(RateFn::power(1.0, 1.5, 0.25), 1.0, 0.0).value, 0.0);
}

TEST(Coupling, LinearThreeSetFunction) {
  const MonotoneFn F = MonotoneFn::power(1.0, 1.0);
  const double delta = 4, eps = 0.2, v = 0.3;
  const CouplingConductance c = conductance_from_coupling(F, delta, eps, v);
  EXPECT_NEAR(c.closed, 0.05, 1e-15);
  double best = 0;
  for (int i = 1; i < 200000; ++i) {
    const double th = i / 200000.0;
    best = std::max(best, std::min(0.5 * (1 - th) * eps, 0.25 * eps * delta * th));
  }
  EXPECT_NEAR(c.value, best, 1e-6);
  EXPECT_GE(c.value, c.closed);
}

TEST(OneDim, GaussianProfile) {
  const OneDimProfile g([](double x) { return x * x / 2; });
  const boost::math::normal N;
  for (double p : {0.01, 0.1, 0.3, 0.5}) {
    const double z = boost::math::quantile(boost::math::complement(N, p));
    EXPECT_NEAR(g.J(p), boost::math::pdf(N, z), 1e-7);
  }
  EXPECT_LE(g.I(0.2), g.J(0.2));
}

}  // namespace
