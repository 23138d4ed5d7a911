// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared numerical plumbing: grids, quadrature, root finding, regression,
// deterministic reductions and a small parallel loop.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "subgeo/errors.hpp"

namespace subgeo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadOptions {
  double rel_tol = 1e-8;
  unsigned max_depth = 24;
};

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  require(lo > 0 && hi > lo && n >= 2, "log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline std::vector<double> lin_grid(double lo, double hi, std::size_t n) {
  require(hi > lo && n >= 2, "lin_grid: need lo < hi and n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
  g.back() = hi;
  return g;
}

// Pairwise summation; the reduction order depends only on the input size.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

namespace detail {

inline double gk_piece(const std::function<double(double)>& g, double a, double b, const QuadOptions& opt) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      g, a, b, opt.max_depth, opt.rel_tol, &err);
  return v;
}

}  // namespace detail

// Integral of f over [a, b] with 0 < a < b <= inf. Each piece between
// consecutive breakpoints is integrated in t = log v, where power laws
// become exponentials and kinks at breakpoints are never straddled.
inline double integrate_log(const std::function<double(double)>& f, double a, double b,
                            std::vector<double> breakpoints = {}, const QuadOptions& opt = {}) {
  require(a > 0 && b >= a, "integrate_log: need 0 < a <= b");
  if (a == b) return 0.0;
  breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                   [&](double x) { return !(x > a && x < b); }),
                    breakpoints.end());
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  std::vector<double> cuts;
  cuts.push_back(a);
  cuts.insert(cuts.end(), breakpoints.begin(), breakpoints.end());
  cuts.push_back(b);
  const std::function<double(double)> g = [&](double t) {
    const double v = std::exp(t);
    const double y = f(v);
    return y == 0.0 ? 0.0 : y * v;
  };
  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::log(cuts[i]);
    const double hi = std::isinf(cuts[i + 1]) ? kInf : std::log(cuts[i + 1]);
    if (!(hi > lo)) continue;
    // Probe the piece; an infinite integrand value makes the integral infinite.
    for (double t : {lo, 0.5 * (lo + std::min(hi, lo + 50.0))}) {
      if (std::isinf(f(std::exp(t)))) return kInf;
    }
    parts.push_back(detail::gk_piece(g, lo, hi, opt));
  }
  const double total = pairwise_sum(parts);
  if (std::isnan(total)) throw NumericalError("integrate_log: quadrature produced NaN");
  return total;
}

// Plain-coordinate adaptive quadrature over [a, b] with breakpoints.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> breakpoints = {}, const QuadOptions& opt = {}) {
  require(b >= a, "integrate: need a <= b");
  if (a == b) return 0.0;
  breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                   [&](double x) { return !(x > a && x < b); }),
                    breakpoints.end());
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts{a};
  cuts.insert(cuts.end(), breakpoints.begin(), breakpoints.end());
  cuts.push_back(b);
  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) parts.push_back(detail::gk_piece(f, cuts[i], cuts[i + 1], opt));
  const double total = pairwise_sum(parts);
  if (std::isnan(total)) throw NumericalError("integrate: quadrature produced NaN");
  return total;
}

// Solve g(x) = 0 for x in [lo, hi] with g(lo), g(hi) of opposite sign.
inline double solve_bracketed(const std::function<double(double)>& g, double lo, double hi,
                              int bits = 50) {
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0) == (ghi > 0)) throw NumericalError("solve_bracketed: root not bracketed");
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                             boost::math::tools::eps_tolerance<double>(bits), iters);
  return 0.5 * (r.first + r.second);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of y on x.
inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "least_squares: need >= 2 paired points");
  const double n = double(x.size());
  const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0, "least_squares: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// Log-log fit; points with nonpositive coordinates are dropped.
inline LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  return least_squares(lx, ly);
}

inline unsigned thread_budget() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SUBGEO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = std::min<unsigned>(hw, unsigned(v));
  }
  return hw;
}

// Runs body(i) for i in [0, n). Work is split into contiguous blocks, so any
// result written to slot i is independent of scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned max_threads = 0) {
  unsigned t = max_threads ? std::min(max_threads, thread_budget()) : thread_budget();
  t = unsigned(std::min<std::size_t>(t, n));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(t);
  for (unsigned k = 0; k < t; ++k) {
    pool.emplace_back([&, k] {
      const std::size_t lo = n * k / t, hi = n * (k + 1) / t;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errs[k] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace subgeo
