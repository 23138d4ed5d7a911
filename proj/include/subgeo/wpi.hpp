// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Calculus on weak Poincare inequality parametrizations.
//
// A certificate bounds ||f||_2^2 for centred f by one of
//   alpha(r) E(f) + r Psi(f),   s E(f) + beta(s) Psi(f),   E(f) >= Psi(f) K*(||f||^2 / Psi(f)),
// where Psi is the sieve and a_max = sup ||f||_2^2 / Psi(f).

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subgeo/errors.hpp"
#include "subgeo/monotone_fn.hpp"
#include "subgeo/numerics.hpp"

namespace subgeo {

enum class Sieve { osc2, sup2, custom };
enum class Param { alpha, beta, kstar };

inline double default_a_max(Sieve s) {
  switch (s) {
    case Sieve::osc2: return 0.25;
    case Sieve::sup2: return 1.0;
    case Sieve::custom: break;
  }
  throw ValidationError("custom sieves must declare a_max explicitly");
}

inline const char* to_string(Sieve s) {
  switch (s) {
    case Sieve::osc2: return "osc2";
    case Sieve::sup2: return "sup2";
    case Sieve::custom: return "custom";
  }
  return "?";
}
inline const char* to_string(Param p) {
  switch (p) {
    case Param::alpha: return "alpha";
    case Param::beta: return "beta";
    case Param::kstar: return "kstar";
  }
  return "?";
}

struct WpiCertificate {
  Sieve sieve = Sieve::osc2;
  double a_max = 0.25;
  Param param = Param::beta;
  std::variant<MonotoneFn, RateFn> fn;
  std::string subject = "P";

  const MonotoneFn& monotone() const {
    require(param != Param::kstar, "certificate holds a rate function, not alpha/beta");
    return std::get<MonotoneFn>(fn);
  }
  const RateFn& rate() const {
    require(param == Param::kstar, "certificate does not hold a rate function");
    return std::get<RateFn>(fn);
  }

  void validate() const {
    require(a_max > 0 && std::isfinite(a_max), "certificate: a_max must be positive and finite");
    if (sieve == Sieve::osc2) require(a_max <= 0.25 + 1e-15, "certificate: osc2 sieve needs a_max <= 1/4");
    if (param == Param::kstar) {
      require(std::holds_alternative<RateFn>(fn), "certificate: kstar needs a rate function");
      require(std::abs(rate().a_max() - a_max) <= 1e-12 * a_max, "certificate: rate function a_max mismatch");
      return;
    }
    require(std::holds_alternative<MonotoneFn>(fn), "certificate: alpha/beta need a monotone function");
    const auto& f = monotone();
    require(f.decreasing(), "certificate: alpha/beta must be decreasing");
    auto probes = log_grid(a_max * 1e-9, a_max * (1 - 1e-9), 64);
    if (param == Param::alpha) {
      for (double r : probes) require(f(r) > 0, "certificate: alpha must be positive below a_max");
    } else {
      require(f.cap() <= a_max * (1 + 1e-12), "certificate: beta must be capped at a_max");
    }
  }
};

// Builds a validated certificate. Beta functions are normalized to
// min(beta, a_max), which is again a valid beta for the same inequality.
inline WpiCertificate make_certificate(Param param, MonotoneFn fn, Sieve sieve = Sieve::osc2,
                                       std::optional<double> a_max = std::nullopt, std::string subject = "P") {
  WpiCertificate c{sieve, a_max ? *a_max : default_a_max(sieve), param, fn, std::move(subject)};
  if (param == Param::beta) c.fn = fn.capped(c.a_max);
  require(param != Param::kstar, "make_certificate: use make_kstar_certificate for rate functions");
  c.validate();
  return c;
}

inline WpiCertificate make_kstar_certificate(RateFn k, Sieve sieve = Sieve::osc2, std::string subject = "P") {
  WpiCertificate c{sieve, k.a_max(), Param::kstar, k, std::move(subject)};
  c.validate();
  return c;
}

inline MonotoneFn generalized_inverse(const MonotoneFn& f) { return f.generalized_inverse(); }

namespace detail {

// K*(v) = sup_s (v - beta(s)) / s over s in `knots`, exact for linear or
// right-continuous step beta between knots.
inline RateFn kstar_from_beta_knots(const std::vector<double>& s, const std::vector<double>& b, double a) {
  std::vector<Line> lines{{0.0, 0.0}};
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] > 0 && std::isfinite(b[i])) lines.push_back({1.0 / s[i], -std::min(b[i], a) / s[i]});
  auto [xs, ys] = upper_envelope(lines, 0.0, a);
  ys.front() = 0.0;
  return RateFn(MonotoneFn(Grid{xs, ys, Interp::linear, Tail::constant, Tail::power}, Direction::increasing), a);
}

inline MonotoneFn beta_from_lines(std::vector<Line> lines) {
  lines.push_back({0.0, 0.0});
  auto [xs, ys] = upper_envelope(lines, 0.0, 1e300);
  // The flat zero line wins eventually; drop the far sentinel.
  if (xs.size() > 2) {
    xs.pop_back();
    ys.pop_back();
  }
  for (auto& y : ys) y = std::max(0.0, y);
  if (ys.back() != 0.0) {
    xs.push_back(xs.back() * 2 + 1);
    ys.push_back(0.0);
  }
  return MonotoneFn(Grid{xs, ys, Interp::linear, Tail::constant, Tail::zero}, Direction::decreasing);
}

}  // namespace detail

// beta -> K*(v) = sup_u {uv - u beta(1/u)} = sup_s (v - beta(s)) / s on [0, a].
inline RateFn beta_to_kstar(const MonotoneFn& beta_in, double a) {
  require(beta_in.decreasing(), "beta_to_kstar: beta must be decreasing");
  require(beta_in.vanishes_at_infinity(),
          "conversion to kstar rejected: beta does not tend to 0, so the certificate would be vacuous");
  const MonotoneFn beta = beta_in.capped(a);
  if (const auto* p = std::get_if<PowerLaw>(&beta.form()); p && !std::isfinite(beta.support_end())) {
    if (p->coef > 0 && p->exponent < 0) {
      const double c0 = p->coef, c1 = -p->exponent;
      const double C = (c1 / (1 + c1)) * std::pow(c0 * (1 + c1), -1.0 / c1);
      return RateFn::power(C, 1 + 1 / c1, a);
    }
    require(p->coef > 0, "beta_to_kstar: beta identically zero is degenerate");
  }
  std::vector<double> s, b;
  if (beta.is_grid()) {
    const Grid& g = beta.grid();
    s = g.x;
    // Knots past the last one carry the certified tail; stop once beta is negligible.
    double x = g.x.back();
    if (g.interp != Interp::step_right && g.right == Tail::zero) s.push_back(x * (1 + 1e-12));
    if (g.interp != Interp::step_right && g.right == Tail::power)
      for (int i = 0; i < 4000 && beta(x) > a * 1e-14; ++i) s.push_back(x *= 2.0);
  } else {
    // Sample where beta crosses [a*1e-12, a]; step knots dominate beta, so the result is a valid K*.
    const MonotoneFn inv = beta.generalized_inverse();
    double lo = inv(a), hi = inv(a * 1e-12);
    if (!(lo > 0) || !std::isfinite(lo)) lo = 1e-12;
    if (!std::isfinite(hi) || hi <= lo) hi = std::max(lo * 1e12, 1.0);
    s = log_grid(lo * 0.5, hi * 2, 4096);
  }
  if (std::isfinite(beta.support_end())) s.push_back(beta.support_end());
  std::sort(s.begin(), s.end());
  for (double x : s) b.push_back(beta(x));
  return detail::kstar_from_beta_knots(s, b, a);
}

// K* -> beta(s) = s K(1/s) = sup_{0 <= v <= a} {v - s K*(v)}.
inline MonotoneFn kstar_to_beta(const RateFn& k) {
  const double a = k.a_max();
  if (const auto* p = std::get_if<PowerLaw>(&k.fn().form())) {
    const double C = p->coef, q = p->exponent;
    require(C > 0, "kstar_to_beta: K* must be positive");
    if (q == 1.0) {
      // sup_v v (1 - s/C) = a (1 - s/C)_+
      return MonotoneFn(Grid{{0.0, 1.0 / C}, {a, 0.0}, Interp::linear, Tail::constant, Tail::zero},
                        Direction::decreasing);
    }
    // Unconstrained supremum is a power law; min with a keeps it valid on the head.
    const double c1 = 1.0 / (q - 1.0);
    const double c0 = (1.0 - 1.0 / q) * std::pow(C * q, -c1);
    return MonotoneFn(PowerLaw{c0, -c1}, Direction::decreasing).capped(a);
  }
  std::vector<Line> lines;
  if (k.fn().is_grid()) {
    const auto& g = k.fn().grid();
    for (std::size_t j = 0; j < g.x.size() && g.x[j] <= a; ++j) lines.push_back({-g.y[j], g.x[j]});
    if (g.x.back() < a || std::find(g.x.begin(), g.x.end(), a) == g.x.end()) lines.push_back({-k(a), a});
  } else {
    // K*(v) >= K*(v_j) on [v_j, v_{j+1}], so these lines dominate the supremum.
    auto v = log_grid(a * 1e-12, a, 4096);
    lines.push_back({0.0, v.front()});
    for (std::size_t j = 0; j + 1 < v.size(); ++j) lines.push_back({-k(v[j]), v[j + 1]});
  }
  return detail::beta_from_lines(std::move(lines));
}

// Converts between parametrizations with the a_max capping rules:
// alpha' = alpha 1[0,a), beta' = min(beta, a).
inline WpiCertificate convert_certificate(const WpiCertificate& cert, Param target) {
  cert.validate();
  if (cert.param == target) return cert;
  const double a = cert.a_max;
  WpiCertificate out = cert;
  out.param = target;
  switch (cert.param) {
    case Param::alpha: {
      const MonotoneFn beta = cert.monotone().truncated(a).generalized_inverse().capped(a);
      if (target == Param::beta) {
        out.fn = beta;
      } else {
        out.fn = beta_to_kstar(beta, a);
      }
      break;
    }
    case Param::beta: {
      const MonotoneFn beta = cert.monotone().capped(a);
      if (target == Param::alpha) {
        out.fn = beta.generalized_inverse().truncated(a);
      } else {
        out.fn = beta_to_kstar(beta, a);
      }
      break;
    }
    case Param::kstar: {
      const MonotoneFn beta = kstar_to_beta(cert.rate()).capped(a);
      if (target == Param::beta) {
        out.fn = beta;
      } else {
        out.fn = beta.generalized_inverse().truncated(a);
      }
      break;
    }
  }
  out.validate();
  return out;
}

// F(x) = int_x^a dv / K*(v) and gamma = F^{-1}.
class DecayProfile {
 public:
  explicit DecayProfile(RateFn k, QuadOptions opt = {}) : k_(std::make_shared<RateFn>(std::move(k))), opt_(opt) {
    const double a = k_->a_max();
    for (double v : log_grid(a * 1e-12, a, 97))
      if (!((*k_)(v) > 0))
        throw NumericalError("decay_profile: K* vanishes on an interior interval; no convergence statement possible");
  }

  double a_max() const { return k_->a_max(); }
  const RateFn& kstar() const { return *k_; }

  // F(x) for x in (0, a]; F(a) = 0 and F(0+) = inf.
  double F(double x) const {
    const double a = a_max();
    if (x >= a) return 0.0;
    if (x <= 0) return kInf;
    return piece(x, a);
  }

  // gamma(n) = F^{-1}(n), the squared-L2 decay envelope.
  double gamma(double n) const {
    const double a = a_max();
    if (n <= 0) return a;
    double hi = a, Fhi = 0.0, lo = a, Flo = 0.0;
    for (;;) {
      lo = hi * 0.5;
      if (lo < 1e-300) return 0.0;
      Flo = Fhi + piece(lo, hi);
      if (Flo >= n) break;
      hi = lo;
      Fhi = Flo;
    }
    const double base = Fhi;
    const double hi_fixed = hi;
    auto g = [&](double t) { return base + piece(std::exp(t), hi_fixed) - n; };
    return std::exp(solve_bracketed(g, std::log(lo), std::log(hi), 52));
  }

  MonotoneFn F_fn() const {
    auto self = *this;
    return MonotoneFn::callable([self](double x) { return self.F(x); }, Direction::decreasing, "F");
  }
  MonotoneFn gamma_fn() const {
    auto self = *this;
    return MonotoneFn::callable([self](double n) { return self.gamma(n); }, Direction::decreasing, "gamma");
  }

 private:
  double piece(double lo, double hi) const {
    if (lo > hi) return -piece(hi, lo);
    const RateFn& k = *k_;
    return integrate_log([&](double v) { return 1.0 / k(v); }, lo, hi, k.kinks(), opt_);
  }

  std::shared_ptr<const RateFn> k_;
  QuadOptions opt_;
};

inline DecayProfile decay_profile(const WpiCertificate& cert, QuadOptions opt = {}) {
  cert.validate();
  const WpiCertificate k = cert.param == Param::kstar ? cert : convert_certificate(cert, Param::kstar);
  return DecayProfile(k.rate(), opt);
}

// Closed form of F for K*(v) = C v^p, p > 1.
inline double power_kstar_F(double C, double p, double a, double x) {
  if (x >= a) return 0.0;
  return (std::pow(x, 1 - p) - std::pow(a, 1 - p)) / (C * (p - 1));
}

// Smallest n with ||P^n f||_2^2 <= eps Psi(f) guaranteed: ceil(F(eps)).
inline long long mixing_time(const WpiCertificate& cert, double eps, QuadOptions opt = {}) {
  require(eps > 0, "mixing_time: eps must be positive");
  if (eps >= cert.a_max) return 0;
  const DecayProfile d = decay_profile(cert, opt);
  const double F = d.F(eps);
  if (!std::isfinite(F)) throw NumericalError("mixing_time: F(eps) is infinite");
  return static_cast<long long>(std::ceil(F - 1e-9 * std::max(1.0, F)));
}

struct OrliczN {
  enum class Kind { power, exp } kind = Kind::power;
  double param = 4.0;  // p for x^p, r for exp(x^r) - 1

  double inverse(double y) const {
    return kind == Kind::power ? std::pow(y, 1.0 / param) : std::pow(std::log1p(y), 1.0 / param);
  }
  void validate() const {
    if (kind == Kind::power)
      require(param > 2, "orlicz_transfer: N(x) = x^p needs p > 2 so that x^-2 N(x) increases");
    else
      require(param >= 1, "orlicz_transfer: N(x) = exp(x^r) - 1 needs r >= 1");
  }
};

// gamma_N(n) = 2^4 gamma(n) N^{-1}(1 / gamma(n))^2, valid for the osc^2 sieve.
inline MonotoneFn orlicz_transfer(const MonotoneFn& gamma, OrliczN N) {
  N.validate();
  require(gamma.decreasing(), "orlicz_transfer: gamma must be decreasing");
  if (const auto* p = std::get_if<PowerLaw>(&gamma.form());
      p && N.kind == OrliczN::Kind::power && !std::isfinite(gamma.cap()) && !std::isfinite(gamma.support_end())) {
    const double e = 1.0 - 2.0 / N.param;
    return MonotoneFn(PowerLaw{16.0 * std::pow(p->coef, e), p->exponent * e}, Direction::decreasing);
  }
  auto g = [gamma, N](double n) {
    const double v = gamma(n);
    if (v <= 0) return 0.0;
    const double inv = N.inverse(1.0 / v);
    return 16.0 * v * inv * inv;
  };
  return MonotoneFn::callable(g, Direction::decreasing, "orlicz");
}

inline MonotoneFn orlicz_transfer(const WpiCertificate& cert, OrliczN N) {
  require(cert.sieve == Sieve::osc2, "orlicz_transfer: only established for the osc2 sieve");
  return orlicz_transfer(decay_profile(cert).gamma_fn(), N);
}

struct CltDiagnostic {
  std::optional<bool> summable;          // set only when the verdict is exact
  std::optional<double> summand_exponent;  // k^{-1/2} gamma_N(k)^{1/2} ~ k^e
  std::string method;                   // "analytic" or "partial-sums"
  std::vector<std::pair<long long, double>> partial_sums;
  std::optional<double> fitted_exponent;  // log-log slope of the summand over the last decade
};

// Sum_k k^{-1/2} gamma_N(k)^{1/2}.
inline CltDiagnostic clt_check(const MonotoneFn& gamma_N, long long horizon) {
  require(horizon >= 1, "clt_check: horizon must be >= 1");
  require(gamma_N.decreasing(), "clt_check: gamma_N must be decreasing");
  CltDiagnostic d;
  double s = 0.0;
  long long next = 1;
  for (long long k = 1; k <= horizon; ++k) {
    s += std::sqrt(gamma_N(double(k)) / double(k));
    if (k == next || k == horizon) {
      d.partial_sums.emplace_back(k, s);
      next *= 2;
    }
  }
  auto e = gamma_N.tail_exponent_at_infinity();
  const bool closed = std::holds_alternative<PowerLaw>(gamma_N.form()) || gamma_N.is_grid();
  if (e && closed) {
    d.method = "analytic";
    d.summand_exponent = std::isinf(*e) ? *e : 0.5 * (*e - 1.0);
    d.summable = *d.summand_exponent < -1.0;
  } else {
    d.method = "partial-sums";
    if (horizon >= 20) {
      std::vector<double> ks, gs;
      for (long long k = std::max<long long>(1, horizon / 10); k <= horizon; k += std::max<long long>(1, horizon / 200)) {
        ks.push_back(double(k));
        gs.push_back(std::sqrt(gamma_N(double(k)) / double(k)));
      }
      if (ks.size() >= 2) d.fitted_exponent = loglog_fit(ks, gs).slope;
    }
  }
  return d;
}

enum class Order { equal, second_dominates, first_dominates, incomparable };

inline const char* to_string(Order o) {
  switch (o) {
    case Order::equal: return "equal";
    case Order::second_dominates: return "second_dominates";
    case Order::first_dominates: return "first_dominates";
    case Order::incomparable: return "incomparable";
  }
  return "?";
}

struct OrderVerdict {
  Order order = Order::equal;
  std::optional<double> crossing;   // first sign change of f2 - f1
  std::optional<bool> gamma_consistent;  // decay envelopes ordered the same way
};

// Pointwise comparison of two certificates in c1's parametrization.
inline OrderVerdict order_certificates(const WpiCertificate& c1, const WpiCertificate& c2_in,
                                       std::size_t grid_points = 2001) {
  c1.validate();
  require(c1.sieve == c2_in.sieve && std::abs(c1.a_max - c2_in.a_max) <= 1e-12,
          "order_certificates: certificates must share the sieve");
  const WpiCertificate c2 = convert_certificate(c2_in, c1.param);
  auto f1 = [&](double x) { return c1.param == Param::kstar ? c1.rate()(x) : c1.monotone()(x); };
  auto f2 = [&](double x) { return c2.param == Param::kstar ? c2.rate()(x) : c2.monotone()(x); };
  std::vector<double> xs = c1.param == Param::kstar ? log_grid(c1.a_max * 1e-9, c1.a_max, grid_points)
                                                    : log_grid(1e-6, 1e6, grid_points);
  auto add_knots = [&](const std::vector<double>& k) {
    for (double x : k)
      if (x > xs.front() && x < xs.back()) xs.push_back(x);
  };
  if (c1.param == Param::kstar) {
    add_knots(c1.rate().kinks());
    add_knots(c2.rate().kinks());
  } else {
    add_knots(c1.monotone().kinks());
    add_knots(c2.monotone().kinks());
  }
  std::sort(xs.begin(), xs.end());
  auto sign = [&](double x) {
    const double a = f1(x), b = f2(x);
    const double tol = 1e-12 * std::max({1e-300, std::abs(a), std::abs(b)});
    if (b - a > tol) return 1;
    if (a - b > tol) return -1;
    return 0;
  };
  OrderVerdict v;
  int seen = 0;
  double prev_x = xs.front();
  bool pos = false, neg = false;
  for (double x : xs) {
    const int s = sign(x);
    pos = pos || s > 0;
    neg = neg || s < 0;
    if (s != 0 && seen != 0 && s != seen && !v.crossing) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 200 && hi / lo > 1 + 1e-14; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (sign(mid) == s) hi = mid; else lo = mid;
      }
      v.crossing = hi;
    }
    if (s != 0) {
      seen = s;
      prev_x = x;
    }
  }
  if (pos && neg) {
    v.order = Order::incomparable;
    return v;
  }
  v.order = pos ? Order::second_dominates : (neg ? Order::first_dominates : Order::equal);
  // Decay envelopes must follow: larger alpha/beta (smaller K*) means slower decay.
  const DecayProfile d1 = decay_profile(c1), d2 = decay_profile(c2);
  bool ok = true;
  const int expect = (v.order == Order::equal) ? 0 : ((v.order == Order::second_dominates) ? 1 : -1);
  const int flip = c1.param == Param::kstar ? -1 : 1;
  for (double n : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0, 10000.0}) {
    const double g1 = d1.gamma(n), g2 = d2.gamma(n);
    const double tol = 1e-7 * std::max(g1, g2);
    if (expect * flip > 0) ok = ok && g2 >= g1 - tol;
    if (expect * flip < 0) ok = ok && g1 >= g2 - tol;
    if (expect == 0) ok = ok && std::abs(g1 - g2) <= tol;
  }
  v.gamma_consistent = ok;
  return v;
}

}  // namespace subgeo
