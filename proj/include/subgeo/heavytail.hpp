// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Bound calculators for random walk Metropolis on heavy-tailed targets:
// isoperimetric minorants, smoothness and close-coupling constants, weak
// conductance, K*, mixing-time and asymptotic-variance bounds.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "subgeo/errors.hpp"
#include "subgeo/monotone_fn.hpp"
#include "subgeo/numerics.hpp"

namespace subgeo {

enum class Family { student_t, product_student, subexp_product, cauchy_type, custom };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::student_t: return "student_t";
    case Family::product_student: return "product_student";
    case Family::subexp_product: return "subexp_product";
    case Family::cauchy_type: return "cauchy_type";
    case Family::custom: return "custom";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  for (Family f : {Family::student_t, Family::product_student, Family::subexp_product, Family::cauchy_type,
                   Family::custom})
    if (s == family_name(f)) return f;
  throw ValidationError("unknown target family '" + s + "'");
}

// Heavy-tailed target pi = exp(-U) on R^d.
//   student_t        U = (d + tau)/2 log(tau + |x|^2)
//   product_student  U = sum_i (1 + eta)/2 log(1 + x_i^2)
//   subexp_product   U = sum_i (tau + x_i^2)^{eta/2},  eta in (0, 1)
//   cauchy_type      U = (d + eta)/2 log(1 + |x|^2), i.e. V(x) = (1 + |x|^2)^{1/2}
//   custom           minorant and L supplied by the caller
struct TargetSpec {
  Family family = Family::student_t;
  int d = 2;
  double tau = 1.0;
  double eta = 1.0;
  // Abstract constant c(tau), c(eta), c(eta, tau) of the minorant. The
  // families' literature leaves it symbolic; 1 unless the caller resolves it.
  double c = 1.0;
  bool constant_resolved = false;
  double xi = 0.0;  // student_t: 0 selects sqrt(2 / min(d, tau))
  bool dimension_factor = true;  // student_t d^{-1/2} factor; off is an experiment, not a proven bound
  std::optional<MonotoneFn> custom_minorant;
  double custom_L = 0.0;

  void validate() const {
    require(d >= 1, "TargetSpec: d must be at least 1");
    require(c > 0 && std::isfinite(c), "TargetSpec: minorant constant c must be positive");
    switch (family) {
      case Family::student_t: require(tau > 0, "TargetSpec: student_t needs tau > 0"); break;
      case Family::product_student: require(eta > 0, "TargetSpec: product_student needs eta > 0"); break;
      case Family::subexp_product:
        require(eta > 0 && eta < 1, "TargetSpec: subexp_product needs eta in (0, 1)");
        require(tau > 0, "TargetSpec: subexp_product needs tau > 0");
        break;
      case Family::cauchy_type: require(eta > 0, "TargetSpec: cauchy_type needs eta > 0"); break;
      case Family::custom:
        require(custom_minorant.has_value(), "TargetSpec: custom family needs a minorant");
        require(custom_L > 0, "TargetSpec: custom family needs L > 0");
        break;
    }
  }

  // Effective xi for the Student-t minorant.
  double student_xi() const {
    const double need = std::sqrt(2.0 / std::min(double(d), tau));
    return std::max(xi, need);
  }
};

// Potential U(x); +inf never occurs for the named families.
inline double potential(const TargetSpec& t, const double* x) {
  double r2 = 0.0;
  switch (t.family) {
    case Family::student_t:
      for (int i = 0; i < t.d; ++i) r2 += x[i] * x[i];
      return 0.5 * (t.d + t.tau) * std::log(t.tau + r2);
    case Family::product_student: {
      double u = 0.0;
      for (int i = 0; i < t.d; ++i) u += std::log1p(x[i] * x[i]);
      return 0.5 * (1 + t.eta) * u;
    }
    case Family::subexp_product: {
      double u = 0.0;
      for (int i = 0; i < t.d; ++i) u += std::pow(t.tau + x[i] * x[i], t.eta / 2);
      return u;
    }
    case Family::cauchy_type:
      for (int i = 0; i < t.d; ++i) r2 += x[i] * x[i];
      return 0.5 * (t.d + t.eta) * std::log1p(r2);
    case Family::custom: break;
  }
  throw ValidationError("potential: the custom family has no potential");
}

struct IsoMinorant {
  MonotoneFn fn;             // increasing on (0, 1/2]
  bool constant_unresolved;  // prefactor still contains the abstract c
  std::string formula;
};

// Isoperimetric minorant on (0, 1/2]; regular and convex for every family.
inline IsoMinorant iso_minorant(const TargetSpec& t) {
  t.validate();
  const bool unresolved = !t.constant_resolved && t.family != Family::custom;
  const double d = t.d;
  switch (t.family) {
    case Family::student_t: {
      const double xi = t.student_xi();
      if (!(xi < 1))
        throw ValidationError("iso_minorant: student_t needs sqrt(2/min(d, tau)) <= xi < 1; here xi = " +
                              std::to_string(xi));
      double k = t.c * std::sqrt((1 - xi) / (1 + xi));
      if (t.dimension_factor) k /= std::sqrt(d);
      return {MonotoneFn::power(k, 1 + 1 / t.tau), unresolved, "c ((1-xi)/(1+xi))^{1/2} d^{-1/2} p^{1+1/tau}"};
    }
    case Family::product_student:
      return {MonotoneFn::power(t.c * std::pow(d, -1 / t.eta), 1 + 1 / t.eta), unresolved,
              "c d^{-1/eta} p^{1+1/eta}"};
    case Family::cauchy_type:
      return {MonotoneFn::power(t.c, 1 + 1 / t.eta), unresolved, "c p^{1+1/eta}"};
    case Family::subexp_product: {
      const double k = 1 / t.eta - 1, c = t.c;
      auto f = [c, k, d](double p) { return p <= 0 ? 0.0 : c * p * std::pow(std::log(d / p), -k); };
      return {MonotoneFn::callable(f, Direction::increasing, "c p log(d/p)^{-(1/eta-1)}"), unresolved,
              "c p log(d/p)^{-(1/eta-1)}"};
    }
    case Family::custom:
      return {*t.custom_minorant, false, "custom"};
  }
  throw ValidationError("iso_minorant: unknown family");
}

// ||Hess U|| as a function of the radius (radial families) or of a single
// coordinate (product families, where the Hessian is diagonal). For d = 1
// only |A''| enters, since there is no tangential direction.
inline double hessian_norm(const TargetSpec& t, double r) {
  r = std::abs(r);
  const double r2 = r * r;
  auto radial = [&](double a1_over_r, double a2) {
    return t.d >= 2 ? std::max(std::abs(a2), std::abs(a1_over_r)) : std::abs(a2);
  };
  switch (t.family) {
    case Family::student_t: {
      const double s = t.d + t.tau, q = t.tau + r2;
      return radial(s / q, s * (t.tau - r2) / (q * q));
    }
    case Family::cauchy_type: {
      const double s = t.d + t.eta, q = 1 + r2;
      return radial(s / q, s * (1 - r2) / (q * q));
    }
    case Family::product_student: {
      const double q = 1 + r2;
      return std::abs((1 + t.eta) * (1 - r2) / (q * q));
    }
    case Family::subexp_product: {
      const double q = t.tau + r2;
      return std::abs(t.eta * std::pow(q, t.eta / 2 - 2) * (t.tau - (1 - t.eta) * r2));
    }
    case Family::custom: break;
  }
  throw ValidationError("hessian_norm: not available for the custom family");
}

// L with ||Hess U|| <= L everywhere, hence U L-smooth.
inline double smoothness_constant(const TargetSpec& t) {
  t.validate();
  switch (t.family) {
    case Family::student_t: return 1 + t.d / t.tau;
    case Family::product_student: return 1 + t.eta;
    case Family::subexp_product: return t.eta * std::pow(t.tau, -(1 - t.eta / 2));
    case Family::cauchy_type: return t.d + t.eta;
    case Family::custom: return t.custom_L;
  }
  return 0.0;
}

struct CloseCoupling {
  double L, sigma, alpha0_lb, delta, epsilon;
};

// RWM with sigma = varsigma (L d)^{-1/2} is (|.|, alpha0 sigma, alpha0 / 2)
// close coupling with alpha0 >= exp(-varsigma^2 / 2) / 2.
inline CloseCoupling close_coupling(const TargetSpec& t, double varsigma) {
  require(varsigma > 0, "close_coupling: varsigma must be positive");
  const double L = smoothness_constant(t);
  const double sigma = varsigma / std::sqrt(L * t.d);
  const double a0 = 0.5 * std::exp(-0.5 * varsigma * varsigma);
  return {L, sigma, a0, a0 * sigma, a0 / 2};
}

struct RwmWcp {
  MonotoneFn phi;
  RateFn kstar;
  double precondition_lhs, precondition_rhs;  // 2 varsigma L^{-1/2} I(1/4) <= d^{1/2}
};

inline void check_rwm_precondition(double lhs, double rhs) {
  if (!(lhs <= rhs))
    throw ValidationError("RWM precondition 2 varsigma L^{-1/2} I(1/4) <= d^{1/2} fails: " + std::to_string(lhs) +
                          " > " + std::to_string(rhs));
}

// Weak conductance and K* lower bounds for RWM.
//   Phi(v) >= 2^-6 varsigma e^{-varsigma^2} (L d)^{-1/2} I(v/2) / (v/2)
//   K*(v)  >= 2^-11 varsigma^2 e^{-2 varsigma^2} (L d)^{-1} I(v/8)^2 / (v/8)
inline RwmWcp rwm_wcp_bound(const TargetSpec& t, double varsigma) {
  require(varsigma > 0, "rwm_wcp_bound: varsigma must be positive");
  const IsoMinorant iso = iso_minorant(t);
  const double L = smoothness_constant(t), d = t.d;
  const double lhs = 2 * varsigma * iso.fn(0.25) / std::sqrt(L), rhs = std::sqrt(d);
  check_rwm_precondition(lhs, rhs);
  const double a = std::ldexp(varsigma * std::exp(-varsigma * varsigma) / std::sqrt(L * d), -6);
  const double b = std::ldexp(varsigma * varsigma * std::exp(-2 * varsigma * varsigma) / (L * d), -11);
  const MonotoneFn I = iso.fn;
  if (const auto* p = std::get_if<PowerLaw>(&I.form())) {
    // I = k p^e: Phi = a k 2^{1-e} v^{e-1}; K* = b k^2 8^{1-2e} v^{2e-1}.
    const double e = p->exponent, k = p->coef;
    return {MonotoneFn::power(a * k * std::pow(2.0, 1 - e), e - 1),
            RateFn::power(b * k * k * std::pow(8.0, 1 - 2 * e), 2 * e - 1, 0.25), lhs, rhs};
  }
  auto phi = [a, I](double v) { return v <= 0 ? 0.0 : a * I(v / 2) / (v / 2); };
  auto ks = [b, I](double v) {
    if (v <= 0) return 0.0;
    const double i = I(v / 8);
    return b * i * i / (v / 8);
  };
  return {MonotoneFn::callable(phi, Direction::increasing, "RWM weak conductance bound"),
          RateFn(MonotoneFn::callable(ks, Direction::increasing, "RWM K* bound"), 0.25), lhs, rhs};
}

struct MixingReport {
  std::string family;
  double varsigma = 0, eps_mix = 0, u = 0;
  double L = 0, sigma = 0, delta = 0, epsilon = 0, alpha0_lb = 0, c = 1;
  bool constant_unresolved = true;
  double lower = 0, upper = 0;  // integration limits 2^-3 eps/u and 2^-5
  double prefactor = 0;         // 2^14 varsigma^-2 e^{2 varsigma^2} L d
  double integral = 0;          // quadrature of int v dv / I(v)^2
  double bound = 1;             // 1 + prefactor * integral
  std::uint64_t n_bound = 1;
  bool n_saturated = false;     // bound exceeds 2^64; n_bound is UINT64_MAX
  // Exact antiderivative of the same integral, and the simplified display
  // obtained by dropping the upper limit (always >= bound).
  std::optional<double> closed_form, display;
  std::string display_formula;
};

namespace detail {

// Antiderivative route for the named families: returns (exact, display)
// values of int_lo^hi v dv / I(v)^2.
inline std::optional<std::pair<double, double>> mixing_integral_closed(const TargetSpec& t, const MonotoneFn& I,
                                                                       double lo, double hi) {
  if (const auto* p = std::get_if<PowerLaw>(&I.form())) {
    // I = k v^{1+1/s}: int v^{-1-2/s} / k^2 = (s/2) k^-2 [lo^{-2/s} - hi^{-2/s}].
    const double s = 1 / (p->exponent - 1), k = p->coef;
    const double disp = s / 2 / (k * k) * std::pow(lo, -2 / s);
    return std::make_pair(disp - s / 2 / (k * k) * std::pow(hi, -2 / s), disp);
  }
  if (t.family == Family::subexp_product) {
    // t = log(d/v): c^-2 int t^{2/eta - 2} dt = c^-2 / (2/eta - 1) [T^{2/eta-1}].
    const double m = 2 / t.eta - 1, d = t.d;
    const double disp = std::pow(std::log(d / lo), m) / (m * t.c * t.c);
    return std::make_pair(disp - std::pow(std::log(d / hi), m) / (m * t.c * t.c), disp);
  }
  return std::nullopt;
}

}  // namespace detail

// n >= 1 + 2^14 varsigma^-2 e^{2 varsigma^2} L d int_{eps/(8u)}^{1/32} v dv / I(v)^2
// guarantees chi^2(nu P^n, pi) <= eps for ||d nu / d pi||_osc^2 = u.
inline MixingReport rwm_mixing_time(const TargetSpec& t, double varsigma, double eps_mix, double u) {
  require(eps_mix > 0, "rwm_mixing_time: eps_mix must be positive");
  require(u >= 1, "rwm_mixing_time: u must be at least 1");
  const IsoMinorant iso = iso_minorant(t);
  const CloseCoupling cc = close_coupling(t, varsigma);
  const double d = t.d;
  check_rwm_precondition(2 * varsigma * iso.fn(0.25) / std::sqrt(cc.L), std::sqrt(d));
  MixingReport r;
  r.family = family_name(t.family);
  r.varsigma = varsigma;
  r.eps_mix = eps_mix;
  r.u = u;
  r.L = cc.L;
  r.sigma = cc.sigma;
  r.delta = cc.delta;
  r.epsilon = cc.epsilon;
  r.alpha0_lb = cc.alpha0_lb;
  r.c = t.c;
  r.constant_unresolved = iso.constant_unresolved;
  r.lower = eps_mix / u / 8;
  r.upper = 1.0 / 32;
  r.prefactor = std::ldexp(std::exp(2 * varsigma * varsigma) / (varsigma * varsigma) * cc.L * d, 14);
  r.display_formula = iso.formula;
  if (r.lower >= r.upper) return r;  // empty range: n = 1
  const MonotoneFn I = iso.fn;
  r.integral = integrate_log(
      [&](double v) {
        const double i = I(v);
        return v / (i * i);
      },
      r.lower, r.upper, {}, QuadOptions{1e-11, 30});
  r.bound = 1 + r.prefactor * r.integral;
  if (!std::isfinite(r.bound)) throw NumericalError("rwm_mixing_time: bound is not finite");
  r.n_saturated = r.bound >= 0x1p64;
  r.n_bound = r.n_saturated ? std::numeric_limits<std::uint64_t>::max() : std::uint64_t(std::ceil(r.bound));
  if (auto cf = detail::mixing_integral_closed(t, I, r.lower, r.upper)) {
    r.closed_form = 1 + r.prefactor * cf->first;
    r.display = 1 + r.prefactor * cf->second;
  }
  return r;
}

struct AsymVarBound {
  bool divergent = false;
  double value = kInf;        // 4 Psi(f) B(||f||^2 / Psi(f))
  double B = kInf;
  double tail_exponent = 0;   // exponent e of K*(w) ~ w^e at 0
};

namespace detail {

inline double kstar_exponent_at_zero(const RateFn& k) {
  const MonotoneFn& f = k.fn();
  if (const auto* p = std::get_if<PowerLaw>(&f.form())) return p->coef == 0 ? kInf : p->exponent;
  if (f.is_grid()) {
    const Grid& g = f.grid();
    if (g.x.size() >= 2 && g.x.front() == 0.0) return g.y[1] > 0 ? 1.0 : kInf;
  }
  const double w1 = 1e-14, w2 = 1e-12, k1 = k(w1), k2 = k(w2);
  if (!(k1 > 0) || !(k2 > 0)) return kInf;
  return std::log(k2 / k1) / std::log(w2 / w1);
}

}  // namespace detail

// var(P, f) <= 4 Psi(f) B(||f||_2^2 / Psi(f)), B(v) = int_0^v w / K*(w) dw,
// when P* P satisfies the K*-WPI. Divergent when w / K*(w) is not
// integrable at 0, i.e. K*(w) ~ w^e with e >= 2 (treated with a margin).
inline AsymVarBound asym_variance_bound(const RateFn& kstar, double psi_f, double l2_f) {
  require(psi_f > 0 && l2_f >= 0, "asym_variance_bound: need Psi(f) > 0 and ||f||_2^2 >= 0");
  const double v = l2_f / psi_f;
  require(v <= kstar.a_max() * (1 + 1e-12), "asym_variance_bound: ||f||^2 / Psi(f) exceeds a_max");
  AsymVarBound out;
  out.tail_exponent = detail::kstar_exponent_at_zero(kstar);
  if (v == 0) {
    out.B = out.value = 0.0;
    return out;
  }
  if (!(out.tail_exponent < 2 - 1e-3)) {
    out.divergent = true;
    return out;
  }
  // Below w0 the power law w^e is used analytically.
  const double w0 = v * 1e-12, e = out.tail_exponent;
  const double head = w0 * w0 / kstar(w0) / (2 - e);
  auto g = [&](double w) { return w / kstar(w); };
  out.B = head + integrate_log(g, w0, v, kstar.kinks(), QuadOptions{1e-10, 30});
  out.value = 4 * psi_f * out.B;
  return out;
}

// A regular isoperimetric minorant is a three-set function on (0, 1/2].
inline MonotoneFn three_set_from_minorant(const MonotoneFn& minorant) {
  require(!minorant.decreasing(), "three_set_from_minorant: minorant must be increasing");
  return minorant;
}

struct CouplingConductance {
  double value;   // sup over theta of the min expression
  double theta;   // maximiser found
  double closed;  // eps/4 min{1, delta/2 F(v/2) / (v/2)}
};

// Weak conductance lower bound at v from a three-set function F and a
// (d, delta, eps) close coupling. Every theta gives a valid bound, so grid
// search plus Brent refinement is safe; theta = 1/2 recovers the closed form.
inline CouplingConductance conductance_from_coupling(const MonotoneFn& F, double delta, double eps, double v,
                                                     std::size_t grid = 512) {
  require(delta > 0 && eps > 0 && eps <= 1, "conductance_from_coupling: need delta > 0 and eps in (0, 1]");
  require(v > 0 && v <= 0.5, "conductance_from_coupling: v must lie in (0, 1/2]");
  auto obj = [&](double th) {
    if (th <= 0) return 0.0;
    const double p = th * v;
    return std::min(0.5 * (1 - th) * eps, 0.25 * eps * delta * th * F(p) / p);
  };
  double best = obj(0.5), arg = 0.5;
  const auto th = lin_grid(0.0, 1.0, grid);
  std::size_t ia = grid;
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double o = obj(th[i]);
    if (o > best) {
      best = o;
      arg = th[i];
      ia = i;
    }
  }
  if (ia < grid && ia > 0 && ia + 1 < th.size()) {
    auto r = boost::math::tools::brent_find_minima([&](double x) { return -obj(x); }, th[ia - 1], th[ia + 1], 40);
    if (-r.second > best) {
      best = -r.second;
      arg = r.first;
    }
  }
  const double closed = 0.25 * eps * std::min(1.0, 0.5 * delta * F(v / 2) / (v / 2));
  if (best < closed * (1 - 1e-12)) throw NumericalError("conductance_from_coupling: sup below the closed form");
  return {best, arg, closed};
}

// One-dimensional profile of pi(dx) ~ exp(-A(|x|)) dx, where
// I(p) = min{J(p), 2 J(p/2)} and J = pi o G^{-1}; for sanity checks only.
class OneDimProfile {
 public:
  explicit OneDimProfile(std::function<double(double)> A) : A_(std::move(A)) {
    half_mass_ = tail(0.0);
    require(std::isfinite(half_mass_) && half_mass_ > 0, "OneDimProfile: exp(-A) must be integrable");
  }

  // J(p) for p in (0, 1/2]; by symmetry J(1 - p) = J(p).
  double J(double p) const {
    require(p > 0 && p < 1, "OneDimProfile::J: p must lie in (0, 1)");
    p = std::min(p, 1 - p);
    if (p >= 0.5) return std::exp(-A_(0.0)) / (2 * half_mass_);
    double hi = 1.0;
    while (tail(hi) / (2 * half_mass_) > p) hi *= 2;
    const double x = solve_bracketed([&](double y) { return tail(y) / (2 * half_mass_) - p; }, 0.0, hi);
    return std::exp(-A_(x)) / (2 * half_mass_);
  }
  double I(double p) const { return std::min(J(p), 2 * J(p / 2)); }

  // d (c1/c2) J(p / (2 c1 d)) <= I_{pi^{(x) d}}(p), c1 = 2 sqrt 6, c2 = 2 (1 + c1).
  double product_lower(int d, double p) const {
    const double c1 = 2 * std::sqrt(6.0), c2 = 2 * (1 + c1);
    return d * c1 / c2 * J(p / (2 * c1 * d));
  }

 private:
  double tail(double x) const {
    auto f = [&](double r) { return std::exp(-A_(r)); };
    const double mid = std::max(x, 1.0);
    double s = x < mid ? integrate(f, x, mid) : 0.0;
    return s + integrate_log(f, mid, kInf, {}, QuadOptions{1e-10, 30});
  }

  std::function<double(double)> A_;
  double half_mass_ = 0.0;
};

}  // namespace subgeo
