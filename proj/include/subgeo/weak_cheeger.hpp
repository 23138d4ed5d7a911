// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Conversions between weak conductance profiles Phi, L1 weak Poincare
// constants alpha_1, L2 constants alpha and rate functions K*.
//
// Every conversion is one-sided: outputs are valid whenever inputs are, and
// any discretisation errs on the safe side (alpha, alpha_1 too large; K* and
// Phi too small).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "subgeo/errors.hpp"
#include "subgeo/monotone_fn.hpp"
#include "subgeo/numerics.hpp"

namespace subgeo {

struct CheegerOptions {
  std::size_t grid = 512;  // points per continuous sup/inf
  double lo = 1e-6;        // smallest mass / r resolved
};

namespace detail {

// A nondecreasing profile seen as pieces ending at m_k with value phi_k:
// Phi >= phi_k on the piece, and (s - r) / s is largest at its right end.
struct ProfilePiece {
  double end;
  double value;
};

inline std::vector<ProfilePiece> profile_pieces(const MonotoneFn& phi, const CheegerOptions& opt) {
  require(!phi.decreasing(), "weak conductance profile must be nondecreasing");
  std::vector<ProfilePiece> out;
  if (phi.is_grid() && phi.grid().interp == Interp::step_left) {
    // Exact: value y_k on (x_{k-1}, x_k].
    const Grid& g = phi.grid();
    if (g.left == Tail::zero) out.push_back({g.x.front(), 0.0});
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      if (g.x[k] > 0.5) {
        out.push_back({0.5, g.y[k]});
        return out;
      }
      out.push_back({g.x[k], g.y[k]});
    }
    if (g.x.back() < 0.5 && g.right != Tail::infinite)
      out.push_back({0.5, g.right == Tail::zero ? 0.0 : g.y.back()});
    return out;
  }
  // Lower staircase: Phi(s_j) on [s_j, s_{j+1}), which never exceeds Phi.
  std::vector<double> s = log_grid(opt.lo / 2, 0.5, opt.grid);
  for (double r : log_grid(opt.lo, 0.25, opt.grid)) s.push_back(r / 2);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  out.push_back({s.front(), std::max(0.0, phi(0.0))});
  for (std::size_t j = 0; j + 1 < s.size(); ++j) out.push_back({s[j + 1], phi(s[j])});
  out.push_back({0.5, phi(0.5)});
  return out;
}

inline MonotoneFn alpha1_from_pieces(const std::vector<ProfilePiece>& pieces) {
  double inf_below = 0.0;
  std::vector<Line> lines{{0.0, 0.0}};
  for (const auto& p : pieces) {
    if (!(p.end > 0) || std::isinf(p.value)) continue;
    if (p.value <= 0) {
      inf_below = std::max(inf_below, p.end);
      continue;
    }
    lines.push_back({-1.0 / (p.end * p.value), 1.0 / p.value});
  }
  auto [x, y] = upper_envelope(std::move(lines), 0.0, 0.5);
  for (std::size_t i = 1; i < y.size(); ++i) y[i] = std::min(y[i], y[i - 1]);
  MonotoneFn env(Grid{x, y, Interp::linear, Tail::constant, Tail::constant}, Direction::decreasing);
  if (inf_below <= 0) return env;
  std::vector<double> kinks = x;
  kinks.push_back(inf_below);
  return MonotoneFn::callable([env, inf_below](double r) { return r < inf_below ? kInf : env(r); },
                              Direction::decreasing, "alpha_1 (infinite below " + std::to_string(inf_below) + ")",
                              std::move(kinks));
}

// Greatest convex minorant of the points (x_i, y_i): drops knots where the
// chord slope decreases, which can only lower the function.
inline void lower_convex_hull(std::vector<double>& x, std::vector<double>& y) {
  std::vector<double> hx, hy;
  auto slope = [](double x0, double y0, double x1, double y1) { return (y1 - y0) / (x1 - x0); };
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hx.size() >= 2 &&
           slope(hx[hx.size() - 2], hy[hy.size() - 2], hx.back(), hy.back()) > slope(hx.back(), hy.back(), x[i], y[i])) {
      hx.pop_back();
      hy.pop_back();
    }
    hx.push_back(x[i]);
    hy.push_back(y[i]);
  }
  x = std::move(hx);
  y = std::move(hy);
}

// Brent refinement of a grid optimum on [a, b]; every probe is itself a
// valid certificate, so refinement can only help.
template <class F>
double refine_min(F&& f, double a, double b, double best) {
  if (!(b > a)) return best;
  auto r = boost::math::tools::brent_find_minima(f, a, b, 40);
  return std::min(best, r.second);
}

}  // namespace detail

// alpha_1(r) = sup_{r <= s <= 1/2} (s - r) / (s Phi(s)). Exact for staircases;
// other profiles go through a lower staircase, which only enlarges alpha_1.
// Infinite wherever Phi vanishes on [r, 1/2].
inline MonotoneFn wcp_to_l1wpi(const MonotoneFn& phi, const CheegerOptions& opt = {}) {
  return detail::alpha1_from_pieces(detail::profile_pieces(phi, opt));
}

// Phi(v) >= sup_{0 < r <= v} (v - r) / (alpha_1(r) v). For a linear-grid
// alpha_1 the objective is monotone on each segment, so the sup over the
// knots is exact; otherwise a log grid with Brent refinement is used.
inline MonotoneFn l1wpi_to_wcp(const MonotoneFn& alpha1, const CheegerOptions& opt = {}) {
  require(alpha1.decreasing(), "l1wpi_to_wcp: alpha_1 must be decreasing");
  const bool exact = alpha1.is_grid() && alpha1.grid().interp == Interp::linear;
  std::vector<double> knots = alpha1.kinks();
  if (exact) knots = alpha1.grid().x;
  auto eval = [alpha1, knots, exact, opt](double v) -> double {
    if (!(v > 0)) return 0.0;
    auto obj = [&](double r) {
      const double a = alpha1(r);
      if (std::isinf(a)) return 0.0;
      if (a <= 0) return r < v ? kInf : 0.0;
      return (v - r) / (a * v);
    };
    double best = obj(0.0);
    for (double r : knots)
      if (r < v) best = std::max(best, obj(r));
    if (exact || std::isinf(best)) return best;
    const auto g = log_grid(v * opt.lo, v, opt.grid);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double o = obj(g[i]);
      if (o > best) {
        best = o;
        arg = i;
      }
    }
    if (arg > 0 && arg + 1 < g.size())
      best = -detail::refine_min([&](double r) { return -obj(r); }, g[arg - 1], g[arg + 1], -best);
    return best;
  };
  return MonotoneFn::callable(eval, Direction::increasing, "weak conductance from L1-WPI", knots);
}

// alpha(r) = inf_{0<theta<1} alpha_1((1-theta) r)^2 / (2 theta (1-theta)),
// never above the theta = 1/2 value 2 alpha_1(r/2)^2.
inline double l1_to_l2_alpha(const MonotoneFn& alpha1, double r, std::size_t grid = 512) {
  auto obj = [&](double th) {
    const double a = alpha1((1 - th) * r);
    return std::isinf(a) ? kInf : a * a / (2 * th * (1 - th));
  };
  const double half = obj(0.5);
  double best = half;
  std::size_t arg = grid;
  const auto th = lin_grid(0.5 / double(grid), 1 - 0.5 / double(grid), grid);
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double o = obj(th[i]);
    if (o < best) {
      best = o;
      arg = i;
    }
  }
  if (arg < grid && std::isfinite(best)) {
    const double a = arg > 0 ? th[arg - 1] : th[arg] / 2;
    const double b = arg + 1 < th.size() ? th[arg + 1] : (1 + th[arg]) / 2;
    best = detail::refine_min(obj, a, b, best);
  }
  return std::min(best, half);
}

inline MonotoneFn l1_to_l2_wpi(const MonotoneFn& alpha1, const CheegerOptions& opt = {}) {
  require(alpha1.decreasing(), "l1_to_l2_wpi: alpha_1 must be decreasing");
  std::vector<double> kinks;
  for (double k : alpha1.kinks()) kinks.push_back(2 * k);
  return MonotoneFn::callable([alpha1, g = opt.grid](double r) { return l1_to_l2_alpha(alpha1, r, g); },
                              Direction::decreasing, "alpha from L1-WPI", std::move(kinks));
}

struct KstarFromWcp {
  RateFn constructive;  // envelope of (v - r) / alpha(r) over the r grid
  RateFn closed;        // v Phi(v/4)^2 / 4
  std::vector<double> r, alpha;
  double min_ratio = kInf;  // min constructive / closed over the checked v = 2r
};

// Both lower bounds on K* for a profile Phi, with sieve constant 1/4.
// Throws NumericalError if the constructive bound falls below the closed one.
inline KstarFromWcp wcp_to_kstar(const MonotoneFn& phi, const CheegerOptions& opt = {}) {
  const MonotoneFn alpha1 = wcp_to_l1wpi(phi, opt);
  std::vector<double> r = log_grid(opt.lo, 0.25, opt.grid);
  std::vector<double> alpha(r.size());
  parallel_for(r.size(), [&](std::size_t i) { alpha[i] = l1_to_l2_alpha(alpha1, r[i], opt.grid); });
  std::vector<Line> lines{{0.0, 0.0}};
  for (std::size_t i = 0; i < r.size(); ++i)
    if (std::isfinite(alpha[i]) && alpha[i] > 0) lines.push_back({1.0 / alpha[i], -r[i] / alpha[i]});
  auto [x, y] = upper_envelope(std::move(lines), 0.0, 0.25);
  y.front() = 0.0;
  for (auto& v : y) v = std::max(v, 0.0);
  detail::lower_convex_hull(x, y);
  RateFn constructive(MonotoneFn(Grid{x, y, Interp::linear, Tail::constant, Tail::power}, Direction::increasing),
                      0.25);
  // Profiles never exceed 1; an infinite value (no admissible set) is clamped.
  auto closed_fn = [phi](double v) {
    if (!(v > 0)) return 0.0;
    const double p = std::min(phi(v / 4), 1.0);
    return v * p * p / 4;
  };
  std::vector<double> kinks;
  for (double k : phi.kinks()) kinks.push_back(4 * k);
  RateFn closed(MonotoneFn::callable(closed_fn, Direction::increasing, "v Phi(v/4)^2 / 4", kinks), 0.25);
  KstarFromWcp out{constructive, closed, r, alpha, kInf};
  for (double ri : r) {
    const double v = 2 * ri;
    if (v > 0.25 || std::isinf(phi(v / 4))) continue;
    const double c = closed(v), k = constructive(v);
    if (c <= 0) continue;
    out.min_ratio = std::min(out.min_ratio, k / c);
    if (k < c * (1 - 1e-9))
      throw NumericalError("wcp_to_kstar: constructive K* fell below the closed bound at v = " + std::to_string(v));
  }
  return out;
}

// Constant in Phi(m) >= c K*(v) / v with v = m (1 - m).
//   valid:   c = 1/2. From mu x P(A x A^c) >= K*(m(1-m)) for the normalised
//            indicator, (1 - m) >= 1/2 and monotonicity of K*(v)/v.
//   printed: c = 2, the constant as usually stated. It overstates Phi by 4:
//            the independent kernel on two equal states has Phi(1/2) = 1/2
//            and admits K*(v) = v, for which c = 2 would claim Phi >= 2.
enum class WcpConstant { valid, printed };

inline double wcp_constant(WcpConstant c) { return c == WcpConstant::valid ? 0.5 : 2.0; }

// Phi lower bound on (0, 1/2] from a convex K* (sieve constant 1/4).
inline MonotoneFn kstar_to_wcp(const RateFn& kstar, WcpConstant constant = WcpConstant::valid) {
  require(kstar.a_max() >= 0.25 - 1e-15, "kstar_to_wcp: K* must be valid on [0, 1/4]");
  const double c = wcp_constant(constant);
  std::vector<double> kinks;
  for (double k : kstar.kinks())
    if (k > 0 && k <= 0.25) kinks.push_back((1 - std::sqrt(1 - 4 * k)) / 2);
  return MonotoneFn::callable(
      [kstar, c](double m) {
        if (!(m > 0)) return 0.0;
        const double v = std::min(m, 0.5) * (1 - std::min(m, 0.5));
        return c * kstar(v) / v;
      },
      Direction::increasing, "weak conductance from K*", std::move(kinks));
}

// 4 int_{eps/4}^{1/16} dv / (v Phi(v)^2); infinite if Phi vanishes there.
inline double mixing_integral_value(const MonotoneFn& phi, double eps) {
  require(eps > 0, "mixing_integral: eps must be positive");
  if (eps >= 0.25) return 0.0;
  auto f = [&](double v) {
    const double p = phi(v);
    if (std::isinf(p)) return 0.0;
    return p > 0 ? 1.0 / (v * p * p) : kInf;
  };
  return 4 * integrate_log(f, eps / 4, 1.0 / 16, phi.kinks());
}

// Steps after which ||P^n f||^2 <= eps ||f||_osc^2 for a reversible positive
// kernel with weak conductance profile Phi. Reversibility and positivity are
// the caller's obligation (finite_chain can check them).
inline std::uint64_t mixing_integral(const MonotoneFn& phi, double eps) {
  const double v = mixing_integral_value(phi, eps);
  if (!std::isfinite(v)) throw ValidationError("mixing_integral: Phi vanishes on [eps/4, 1/16]");
  if (v >= 9e18) throw NumericalError("mixing_integral: step count overflows");
  return std::uint64_t(std::ceil(v));
}

struct SharpnessReport {
  double old_bound = 0.0;  // 32 int_eps^{1/4} dv / (v Phi(g(v))^2), g(v) = (1 - sqrt(1 - v/8)) / 2
  double new_bound = 0.0;  // 4 int_eps^{1/4} dv / (v Phi(v/4)^2)
  double ratio = kInf;
  bool convex_zero = false;  // caller asserted Phi convex with Phi(0) = 0
  bool ok = false;           // ratio >= 8, or >= 32 when convex_zero
};

// Compares the mixing bound driven by the K* lower bound above against the
// older route through kappa(v) = Phi((1 - sqrt(1 - 4v)) / 2).
inline SharpnessReport sharpness_report(const MonotoneFn& phi, double eps, bool convex_zero = false) {
  require(eps > 0 && eps < 0.25, "sharpness_ratio: eps must lie in (0, 1/4)");
  std::vector<double> k_new, k_old;
  for (double m : phi.kinks()) {
    k_new.push_back(4 * m);
    if (m < 0.5) k_old.push_back(32 * m * (1 - m));
  }
  auto inv_sq = [](double p) { return std::isinf(p) ? 0.0 : (p > 0 ? 1.0 / (p * p) : kInf); };
  SharpnessReport r;
  r.convex_zero = convex_zero;
  r.new_bound = 4 * integrate_log([&](double v) { return inv_sq(phi(v / 4)) / v; }, eps, 0.25, k_new);
  r.old_bound = 32 * integrate_log(
                         [&](double v) { return inv_sq(phi((1 - std::sqrt(1 - v / 8)) / 2)) / v; }, eps, 0.25, k_old);
  if (r.new_bound > 0) r.ratio = r.old_bound / r.new_bound;
  r.ok = r.ratio >= (convex_zero ? 32.0 : 8.0) * (1 - 1e-9);
  return r;
}

inline double sharpness_ratio(const MonotoneFn& phi, double eps) { return sharpness_report(phi, eps).ratio; }

}  // namespace subgeo
