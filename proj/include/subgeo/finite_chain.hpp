// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exact analysis of finite-state chains: kernel algebra, Dirichlet forms,
// L2 decay, subset enumeration (conductance and indicator bounds), sticky
// lower bounds, resolvent positivity and the osc/L2 duality.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subgeo/errors.hpp"
#include "subgeo/monotone_fn.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/wpi.hpp"

namespace subgeo {

inline constexpr double kRowTol = 1e-12;
inline constexpr double kInvarianceTol = 1e-10;
inline constexpr double kReversibleTol = 1e-12;
inline constexpr std::size_t kDefaultSubsetCap = 22;

struct FiniteChain {
  std::vector<std::string> states;
  Eigen::VectorXd mu;
  Eigen::MatrixXd P;
  bool reversible = false;          // claimed; checked by validate()
  bool support_restricted = false;  // zero-mass states permitted

  std::size_t size() const { return std::size_t(mu.size()); }

  void validate() const {
    const auto n = mu.size();
    require(n >= 1, "chain: need at least one state");
    require(P.rows() == n && P.cols() == n, "chain: P must be square with one row per state");
    require(states.empty() || states.size() == std::size_t(n), "chain: one label per state");
    require(std::abs(mu.sum() - 1.0) <= kRowTol * double(n), "chain: mu must sum to 1");
    for (Eigen::Index i = 0; i < n; ++i) {
      require(std::isfinite(mu(i)) && mu(i) >= 0, "chain: mu must be nonnegative");
      require(mu(i) > 0 || support_restricted,
              "chain: zero mu-mass state " + label(std::size_t(i)) + " requires the support_restricted flag");
      double row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        require(std::isfinite(P(i, j)) && P(i, j) >= -1e-15, "chain: P entries must be nonnegative");
        row += P(i, j);
      }
      require(std::abs(row - 1.0) <= kRowTol, "chain: row " + label(std::size_t(i)) + " does not sum to 1");
    }
    const Eigen::RowVectorXd drift = mu.transpose() * P - mu.transpose();
    require(drift.cwiseAbs().maxCoeff() <= kInvarianceTol, "chain: mu is not invariant (|mu P - mu| > 1e-10)");
    if (reversible) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
          require(std::abs(mu(i) * P(i, j) - mu(j) * P(j, i)) <= kReversibleTol,
                  "chain: claimed reversible but detailed balance fails");
    }
  }

  std::string label(std::size_t i) const { return i < states.size() ? states[i] : std::to_string(i); }
};

inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::to_string(i);
  return s;
}

inline FiniteChain make_chain(Eigen::MatrixXd P, Eigen::VectorXd mu, std::vector<std::string> states = {},
                              bool reversible = false, bool support_restricted = false) {
  if (states.empty()) states = default_labels(std::size_t(mu.size()));
  FiniteChain c{std::move(states), std::move(mu), std::move(P), reversible, support_restricted};
  c.validate();
  return c;
}

// Stationary law of an irreducible P: left null vector of P - I.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  const auto n = P.rows();
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd mu = A.fullPivLu().solve(b);
  for (auto& m : mu) m = std::max(0.0, m);
  return mu / mu.sum();
}

inline double mean(const Eigen::VectorXd& mu, const Eigen::VectorXd& f) { return mu.dot(f); }

inline double variance(const Eigen::VectorXd& mu, const Eigen::VectorXd& f) {
  const double m = mean(mu, f);
  return mu.dot((f.array() - m).square().matrix());
}

inline double osc(const Eigen::VectorXd& f) { return f.size() ? f.maxCoeff() - f.minCoeff() : 0.0; }

inline Eigen::VectorXd indicator(std::size_t n, std::uint64_t mask) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(Eigen::Index(n));
  for (std::size_t i = 0; i < n; ++i)
    if (mask >> i & 1u) f(Eigen::Index(i)) = 1.0;
  return f;
}

// ---------------------------------------------------------------------------
// Kernel algebra.

inline FiniteChain adjoint(const FiniteChain& c) {
  const auto n = c.mu.size();
  Eigen::MatrixXd Ps(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c.mu(i) <= 0) {
      require(c.support_restricted, "adjoint: zero mu-mass state without support_restricted flag");
      Ps.row(i).setZero();
      Ps(i, i) = 1.0;
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j) Ps(i, j) = c.mu(j) * c.P(j, i) / c.mu(i);
  }
  return make_chain(std::move(Ps), c.mu, c.states, c.reversible, c.support_restricted);
}

inline FiniteChain reversibilize(const FiniteChain& c) {
  const FiniteChain a = adjoint(c);
  return make_chain(0.5 * (c.P + a.P), c.mu, c.states, true, c.support_restricted);
}

inline FiniteChain lazy(const FiniteChain& c, double eps) {
  require(eps >= 0 && eps <= 1, "lazy: eps must lie in [0, 1]");
  const auto n = c.mu.size();
  return make_chain(eps * Eigen::MatrixXd::Identity(n, n) + (1 - eps) * c.P, c.mu, c.states, c.reversible,
                    c.support_restricted);
}

// Operator composition: the kernel of f -> A(B f) is the matrix A B.
inline FiniteChain compose(const FiniteChain& a, const FiniteChain& b, bool reversible = false) {
  require(a.size() == b.size() && (a.mu - b.mu).cwiseAbs().maxCoeff() <= kInvarianceTol,
          "compose: chains must share the state space and invariant law");
  return make_chain(a.P * b.P, a.mu, a.states, reversible, a.support_restricted || b.support_restricted);
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& P, int k) {
  require(k >= 0, "matrix_power: exponent must be nonnegative");
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  Eigen::MatrixXd b = P;
  while (k > 0) {
    if (k & 1) r = r * b;
    b = b * b;
    k >>= 1;
  }
  return r;
}

// P* P, self-adjoint in L2(mu).
inline FiniteChain multiplicative(const FiniteChain& c) { return compose(adjoint(c), c, true); }

// (P*)^k P^k.
inline FiniteChain power_product(const FiniteChain& c, int k) {
  const FiniteChain a = adjoint(c);
  return make_chain(matrix_power(a.P, k) * matrix_power(c.P, k), c.mu, c.states, true, c.support_restricted);
}

// ---------------------------------------------------------------------------
// Dirichlet forms and decay.

// (1/2) sum_ij mu_i P_ij |f_j - f_i|^p.
inline double dirichlet_form(const FiniteChain& c, const Eigen::VectorXd& f, int p = 2) {
  require(p == 1 || p == 2, "dirichlet_form: p must be 1 or 2");
  require(std::size_t(f.size()) == c.size(), "dirichlet_form: f has the wrong length");
  const auto n = c.mu.size();
  std::vector<double> rows(std::size_t(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = std::abs(f(j) - f(i));
      s += c.P(i, j) * (p == 1 ? d : d * d);
    }
    rows[std::size_t(i)] = c.mu(i) * s;
  }
  return 0.5 * pairwise_sum(rows);
}

struct DecayCurve {
  std::vector<double> values;  // values[n] = ||P^n f - mu(f)||_2^2
  Eigen::VectorXd f;
  double osc = 0.0;
};

inline DecayCurve exact_decay(const FiniteChain& c, const Eigen::VectorXd& f, int n_max) {
  require(n_max >= 0, "exact_decay: n_max must be nonnegative");
  require(std::size_t(f.size()) == c.size(), "exact_decay: f has the wrong length");
  DecayCurve d{{}, f, osc(f)};
  d.values.reserve(std::size_t(n_max) + 1);
  Eigen::VectorXd g = f.array() - mean(c.mu, f);
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) g = c.P * g;
    // Re-centre to stop rounding drift from accumulating along mu.
    g.array() -= mean(c.mu, g);
    d.values.push_back(c.mu.dot(g.cwiseProduct(g)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Subset enumeration. Blocks fix the high bits; inside a block a Gray code
// toggles one state per step and updates mass and boundary flow in O(n).

namespace detail {

struct SubsetStats {
  std::uint64_t mask;
  double mass;  // mu(A)
  double flow;  // mu (x) P (A x A^c)
};

template <class Visit>
void scan_block(const FiniteChain& c, std::size_t low_bits, std::uint64_t block, Visit&& visit) {
  const std::size_t n = c.size();
  std::uint64_t mask = block << low_bits;
  auto in = [&](std::size_t i) { return (mask >> i & 1u) != 0; };
  long double mass = 0.0L, flow = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in(i)) continue;
    mass += c.mu(Eigen::Index(i));
    for (std::size_t j = 0; j < n; ++j)
      if (!in(j)) flow += (long double)c.mu(Eigen::Index(i)) * c.P(Eigen::Index(i), Eigen::Index(j));
  }
  visit(SubsetStats{mask, double(mass), double(flow)});
  const std::uint64_t steps = std::uint64_t(1) << low_bits;
  for (std::uint64_t s = 1; s < steps; ++s) {
    const std::size_t k = std::size_t(std::countr_zero(s));
    const bool adding = !in(k);
    const long double mk = c.mu(Eigen::Index(k));
    long double out_k = 0.0L, in_k = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      if (in(j))
        in_k += (long double)c.mu(Eigen::Index(j)) * c.P(Eigen::Index(j), Eigen::Index(k));
      else
        out_k += mk * c.P(Eigen::Index(k), Eigen::Index(j));
    }
    if (adding) {
      flow += out_k - in_k;
      mass += mk;
    } else {
      flow += in_k - out_k;
      mass -= mk;
    }
    mask ^= std::uint64_t(1) << k;
    visit(SubsetStats{mask, double(mass), double(std::max(0.0L, flow))});
  }
}

inline void check_cap(const FiniteChain& c, std::size_t cap, const char* op) {
  c.validate();
  if (c.size() > cap)
    throw StateCapError(std::string(op) + ": " + std::to_string(c.size()) +
                        " states exceed the exact subset-enumeration cap of " + std::to_string(cap) +
                        "; use the sampled variant (randomized indicator sets, not certified)");
  require(cap <= 30, "subset enumeration cap above 30 states is not supported");
}

// Runs one accumulator per block in parallel; returns them in block order.
template <class Acc, class Visit>
std::vector<Acc> scan_subsets(const FiniteChain& c, Visit visit) {
  const std::size_t n = c.size();
  const std::size_t low = std::min<std::size_t>(n, 16);
  const std::size_t blocks = std::size_t(1) << (n - low);
  std::vector<Acc> parts(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Acc& acc = parts[b];
    scan_block(c, low, std::uint64_t(b), [&](const SubsetStats& s) { visit(acc, s); });
  });
  return parts;
}

struct Frontier {
  struct Item {
    double mass, ratio;
    std::uint64_t mask;
  };
  std::vector<Item> items;

  // Keeps the sets not dominated by a heavier set with a smaller ratio.
  void prune() {
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      if (a.mass != b.mass) return a.mass > b.mass;
      if (a.ratio != b.ratio) return a.ratio < b.ratio;
      return a.mask < b.mask;
    });
    std::vector<Item> keep;
    double best = kInf;
    for (const auto& it : items)
      if (it.ratio < best) {
        keep.push_back(it);
        best = it.ratio;
      }
    items = std::move(keep);
  }
};

}  // namespace detail

struct WeakConductance {
  MonotoneFn phi = MonotoneFn::constant(0.0, Direction::increasing);  // staircase in v
  std::vector<double> masses;                // knots m_1 < ... < m_K <= 1/2
  std::vector<double> values;                // Phi on (m_{k-1}, m_k]
  std::vector<std::uint64_t> minimizers;     // set attaining values[k]
  bool certified = true;
};

namespace detail {

inline WeakConductance conductance_from_frontier(Frontier fr, bool certified) {
  fr.prune();
  require(!fr.items.empty(), "weak conductance: no set with 0 < mu(A) <= 1/2");
  WeakConductance w;
  w.certified = certified;
  for (auto it = fr.items.rbegin(); it != fr.items.rend(); ++it) {
    w.masses.push_back(it->mass);
    w.values.push_back(it->ratio);
    w.minimizers.push_back(it->mask);
  }
  w.phi = MonotoneFn(Grid{w.masses, w.values, Interp::step_left, Tail::constant, Tail::infinite},
                     Direction::increasing);
  return w;
}

inline constexpr double kHalfTol = 1e-12;

}  // namespace detail

// Phi(v) = min over sets with v <= mu(A) <= 1/2 of mu(x)P(A x A^c) / mu(A).
inline WeakConductance weak_conductance_exact(const FiniteChain& c, std::size_t cap = kDefaultSubsetCap) {
  detail::check_cap(c, cap, "weak_conductance_exact");
  require(c.size() >= 2, "weak_conductance_exact: need at least two states");
  auto parts = detail::scan_subsets<detail::Frontier>(c, [](detail::Frontier& acc, const detail::SubsetStats& s) {
    if (s.mass > 0 && s.mass <= 0.5 + detail::kHalfTol) {
      acc.items.push_back({s.mass, s.flow / s.mass, s.mask});
      if (acc.items.size() >= (1u << 16)) acc.prune();
    }
  });
  detail::Frontier all;
  for (auto& p : parts) {
    p.prune();
    all.items.insert(all.items.end(), p.items.begin(), p.items.end());
  }
  return detail::conductance_from_frontier(std::move(all), true);
}

// Upper estimate of Phi from randomly drawn sets plus state-order intervals.
inline WeakConductance weak_conductance_sampled(const FiniteChain& c, std::size_t n_sets, std::uint64_t seed) {
  c.validate();
  const std::size_t n = c.size();
  require(n >= 2, "weak_conductance_sampled: need at least two states");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  detail::Frontier fr;
  std::vector<char> in(n);
  auto consider = [&] {
    double mass = 0.0, flow = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in[i]) continue;
      mass += c.mu(Eigen::Index(i));
      for (std::size_t j = 0; j < n; ++j)
        if (!in[j]) flow += c.mu(Eigen::Index(i)) * c.P(Eigen::Index(i), Eigen::Index(j));
    }
    if (mass > 0 && mass <= 0.5 + detail::kHalfTol) fr.items.push_back({mass, flow / mass, 0});
  };
  for (std::size_t lo = 0; lo < n; ++lo) {
    std::fill(in.begin(), in.end(), 0);
    for (std::size_t i = lo; i < n; ++i) in[i] = 1;
    consider();
    std::fill(in.begin(), in.end(), 0);
    for (std::size_t i = 0; i <= lo; ++i) in[i] = 1;
    consider();
  }
  for (std::size_t t = 0; t < n_sets; ++t) {
    const double p = U(rng);
    for (std::size_t i = 0; i < n; ++i) in[i] = U(rng) < p;
    consider();
  }
  return detail::conductance_from_frontier(std::move(fr), false);
}

struct BetaLowerBound {
  MonotoneFn fn = MonotoneFn::constant(0.0);  // exact piecewise-linear envelope in s
  std::vector<double> s;
  std::vector<double> values;
  bool certified = true;
};

namespace detail {

inline BetaLowerBound beta_bound_from_lines(std::vector<Line> lines, const std::vector<double>& s_grid,
                                            bool certified) {
  BetaLowerBound b;
  b.fn = beta_from_lines(upper_hull(std::move(lines)));
  b.certified = certified;
  b.s = s_grid;
  for (double s : s_grid) b.values.push_back(b.fn(s));
  return b;
}

struct LineAcc {
  std::vector<Line> lines;
};

}  // namespace detail

// max_A {mu(A) mu(A^c) - s E(P, 1_A)} v 0: each set contributes one line in s.
inline BetaLowerBound beta_lower_indicator(const FiniteChain& c, const std::vector<double>& s_grid,
                                           std::size_t cap = kDefaultSubsetCap) {
  detail::check_cap(c, cap, "beta_lower_indicator");
  auto parts = detail::scan_subsets<detail::LineAcc>(c, [](detail::LineAcc& acc, const detail::SubsetStats& s) {
    if (s.mass > 0 && s.mass < 1) {
      acc.lines.push_back({-s.flow, s.mass * (1 - s.mass)});
      if (acc.lines.size() >= (1u << 16)) acc.lines = upper_hull(std::move(acc.lines));
    }
  });
  std::vector<Line> all;
  for (auto& p : parts) {
    auto h = upper_hull(std::move(p.lines));
    all.insert(all.end(), h.begin(), h.end());
  }
  return detail::beta_bound_from_lines(std::move(all), s_grid, true);
}

// sup over eps in (0,1) of mu(A_eps)(1 - s eps - mu(A_eps)),
// A_eps = {x : P(x,{x}) >= 1 - eps}. Only eps = 1 - P(x,{x}) matter.
inline BetaLowerBound beta_lower_sticky(const FiniteChain& c, const std::vector<double>& s_grid) {
  c.validate();
  const std::size_t n = c.size();
  std::vector<std::pair<double, double>> diag(n);  // (holding prob, mass)
  for (std::size_t i = 0; i < n; ++i) diag[i] = {c.P(Eigen::Index(i), Eigen::Index(i)), c.mu(Eigen::Index(i))};
  std::sort(diag.begin(), diag.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::vector<Line> lines;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mass += diag[i].second;
    if (i + 1 < n && diag[i + 1].first == diag[i].first) continue;
    const double eps = 1.0 - std::min(1.0, diag[i].first);
    if (eps >= 1.0) break;
    lines.push_back({-eps * mass, mass * (1 - mass)});
  }
  if (lines.empty()) lines.push_back({0.0, 0.0});
  return detail::beta_bound_from_lines(std::move(lines), s_grid, true);
}

// Exact beta* for two states: every nonconstant f has the same variance and
// Dirichlet form per unit osc^2.
inline MonotoneFn beta_star_two_state(const FiniteChain& c) {
  c.validate();
  require(c.size() == 2, "beta_star_two_state: chain must have two states");
  const double var = c.mu(0) * c.mu(1);
  const double E = c.mu(0) * c.P(0, 1);
  if (E <= 0) return MonotoneFn::constant(var);
  return MonotoneFn(Grid{{0.0, var / E}, {var, 0.0}, Interp::linear, Tail::constant, Tail::zero},
                    Direction::decreasing);
}

// ---------------------------------------------------------------------------
// Dirichlet-form comparisons between P and P*P.

struct ComparisonReport {
  std::size_t n_tested = 0;
  bool upper_holds = true;      // E(P*P, f) <= 2 E(P, f)
  double max_upper_ratio = 0.0;  // max E(P*P, f) / E(P, f)
  std::optional<double> eps;    // min holding probability when positive
  std::optional<bool> lower_holds;  // E(P*P, f) >= 2 eps E(P, f)
  double min_lower_ratio = kInf;
  MonotoneFn chained_beta = MonotoneFn::constant(0.0);  // E(P) <= s E(P*P) + beta(s) osc^2
};

// beta(s) = sum over x != y with s * 2 min(eps_x, eps_y) <= 1 of mu_x S_xy.
inline MonotoneFn chained_wpi_beta(const FiniteChain& c) {
  const FiniteChain S = reversibilize(c);
  const std::size_t n = c.size();
  std::vector<std::pair<double, double>> pairs;  // (threshold 1/delta, weight)
  double forever = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      const double w = c.mu(Eigen::Index(x)) * S.P(Eigen::Index(x), Eigen::Index(y));
      if (w <= 0) continue;
      const double delta = 2 * std::min(c.P(Eigen::Index(x), Eigen::Index(x)), c.P(Eigen::Index(y), Eigen::Index(y)));
      if (delta <= 0)
        forever += w;
      else
        pairs.emplace_back(1.0 / delta, w);
    }
  if (pairs.empty()) return MonotoneFn::constant(forever);
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (xs.empty() || pairs[i].first != xs.back()) xs.push_back(pairs[i].first);
  ys.assign(xs.size(), forever);
  // ys[k] = forever + weight of pairs with threshold >= xs[k].
  double tail = 0.0;
  std::size_t p = pairs.size();
  for (std::size_t k = xs.size(); k-- > 0;) {
    while (p > 0 && pairs[p - 1].first >= xs[k]) tail += pairs[--p].second;
    ys[k] = forever + tail;
  }
  xs.push_back(2 * xs.back());
  ys.push_back(forever);
  return MonotoneFn(Grid{xs, ys, Interp::step_left, Tail::constant, Tail::constant}, Direction::decreasing);
}

inline ComparisonReport dirichlet_comparison_check(const FiniteChain& c, std::uint64_t seed = 1,
                                                   std::size_t n_random = 16) {
  c.validate();
  const std::size_t n = c.size();
  const FiniteChain T = multiplicative(c);
  ComparisonReport r;
  double eps = kInf;
  for (std::size_t i = 0; i < n; ++i) eps = std::min(eps, c.P(Eigen::Index(i), Eigen::Index(i)));
  if (eps > 0) {
    r.eps = eps;
    r.lower_holds = true;
  }
  std::vector<Eigen::VectorXd> basis;
  if (n <= 12) {
    for (std::uint64_t m = 1; m + 1 < (std::uint64_t(1) << n); ++m) basis.push_back(indicator(n, m));
  } else {
    for (std::size_t i = 0; i < n; ++i) basis.push_back(indicator(n, std::uint64_t(1) << i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (std::size_t t = 0; t < n_random; ++t) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(n));
    for (auto& v : f) v = N(rng);
    basis.push_back(f);
  }
  for (const auto& f : basis) {
    const double eP = dirichlet_form(c, f), eT = dirichlet_form(T, f);
    ++r.n_tested;
    const double slack = 1e-12 * std::max(1.0, eP) + 1e-15;
    if (eT > 2 * eP + slack) r.upper_holds = false;
    if (eP > 0) r.max_upper_ratio = std::max(r.max_upper_ratio, eT / eP);
    if (r.eps) {
      if (eT < 2 * eps * eP - slack) r.lower_holds = false;
      if (eP > 0) r.min_lower_ratio = std::min(r.min_lower_ratio, eT / eP);
    }
  }
  r.chained_beta = chained_wpi_beta(c);
  return r;
}

// ---------------------------------------------------------------------------
// Resolvent positivity.

struct RupiVerdict {
  bool is_rupi = false;
  std::optional<int> m;                                  // minimal m with sum_{n<=m} P^n > 0
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // zero entry (A={i}, B={j})
  std::string witness_label;
};

inline RupiVerdict rupi_check(const FiniteChain& c, int m_max) {
  c.validate();
  require(m_max >= 0, "rupi_check: m_max must be nonnegative");
  const auto n = c.mu.size();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < n; ++i)
    if (c.mu(i) > 0) support.push_back(i);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n), Pn = R;
  RupiVerdict v;
  // Positivity pattern stabilizes after n - 1 steps.
  const int last = std::min<int>(m_max, int(n) - 1);
  for (int m = 0;; ++m) {
    std::optional<std::pair<Eigen::Index, Eigen::Index>> zero;
    for (auto i : support) {
      for (auto j : support)
        if (!(R(i, j) > 0)) {
          zero = {i, j};
          break;
        }
      if (zero) break;
    }
    if (!zero) {
      v.is_rupi = true;
      v.m = m;
      return v;
    }
    if (m >= last) {
      v.witness = {std::size_t(zero->first), std::size_t(zero->second)};
      v.witness_label = c.label(std::size_t(zero->first)) + " -> " + c.label(std::size_t(zero->second));
      return v;
    }
    Pn = Pn * c.P;
    R += Pn;
  }
}

// ---------------------------------------------------------------------------
// osc / L2 duality.

struct DualityReport {
  double lhs = 0.0;  // sup_{osc(f) <= 1} ||P^n f - mu(f)||_2
  double rhs = 0.0;  // (1/2) sup_{||f||_2 <= 1} ||(P*)^n f - mu(f)||_1
  bool agree = false;
  double max_tv_ratio = 0.0;  // max TV / (lhs * chi^2^{1/2}) over random nu
  bool tv_ok = true;
};

inline constexpr std::size_t kDualityCap = 15;

inline DualityReport duality_check(const FiniteChain& c, int n, std::uint64_t seed = 7, std::size_t n_nu = 20) {
  c.validate();
  const std::size_t N = c.size();
  if (N > kDualityCap)
    throw StateCapError("duality_check: " + std::to_string(N) + " states exceed the vertex-enumeration cap of 15");
  for (std::size_t i = 0; i < N; ++i) require(c.mu(Eigen::Index(i)) > 0, "duality_check: mu must be positive");
  const Eigen::MatrixXd M = matrix_power(c.P, n);
  const Eigen::MatrixXd Ms = matrix_power(adjoint(c).P, n);
  const Eigen::VectorXd& mu = c.mu;
  const std::uint64_t total = std::uint64_t(1) << N;

  // LHS: vertices f in {0,1}^N; g = M f - mu(f) 1 updated column by column.
  double lhs2 = 0.0;
  {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(Eigen::Index(N));
    std::uint64_t mask = 0;
    for (std::uint64_t s = 1; s < total; ++s) {
      const auto k = Eigen::Index(std::countr_zero(s));
      const double sign = (mask >> k & 1u) ? -1.0 : 1.0;
      mask ^= std::uint64_t(1) << k;
      g += sign * (M.col(k).array() - mu(k)).matrix();
      lhs2 = std::max(lhs2, mu.dot(g.cwiseProduct(g)));
    }
  }
  // RHS: for signs s, f -> sum_i mu_i s_i [(P*)^n (f - mu f)]_i has
  // coefficients c = r - (r.1) mu with r = (mu o s)^T Ms; its sup over the
  // L2(mu) unit ball is sqrt(sum_j c_j^2 / mu_j).
  double rhs = 0.0;
  {
    Eigen::RowVectorXd r = -(mu.transpose() * Ms);  // all signs -1
    std::uint64_t mask = 0;
    auto value = [&] {
      const Eigen::RowVectorXd cc = r - r.sum() * mu.transpose();
      return std::sqrt((cc.array().square() / mu.transpose().array()).sum());
    };
    rhs = value();
    for (std::uint64_t s = 1; s < total; ++s) {
      const auto k = Eigen::Index(std::countr_zero(s));
      const double sign = (mask >> k & 1u) ? -2.0 : 2.0;
      mask ^= std::uint64_t(1) << k;
      r += sign * mu(k) * Ms.row(k);
      rhs = std::max(rhs, value());
    }
    rhs *= 0.5;
  }
  DualityReport rep;
  rep.lhs = std::sqrt(lhs2);
  rep.rhs = rhs;
  rep.agree = std::abs(rep.lhs - rep.rhs) <= 1e-9 * std::max(1.0, rep.lhs);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> E(1.0);
  for (std::size_t t = 0; t < n_nu; ++t) {
    Eigen::VectorXd nu(static_cast<Eigen::Index>(N));
    for (auto& v : nu) v = E(rng);
    nu /= nu.sum();
    const Eigen::RowVectorXd nuP = nu.transpose() * M;
    const double tv = 0.5 * (nuP - mu.transpose()).cwiseAbs().sum();
    const double chi2 = ((nu - mu).array().square() / mu.array()).sum();
    const double bound = rep.lhs * std::sqrt(chi2);
    if (tv > bound * (1 + 1e-9) + 1e-14) rep.tv_ok = false;
    if (bound > 0) rep.max_tv_ratio = std::max(rep.max_tv_ratio, tv / bound);
  }
  return rep;
}

// var_mu(f) <= s var_nu(f) + mu(w > s) osc(f)^2 with w = dmu/dnu.
inline double compare_measures_bound(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXd& f,
                                     double s) {
  require(mu.size() == nu.size() && mu.size() == f.size(), "compare_measures_bound: length mismatch");
  require(s > 0, "compare_measures_bound: s must be positive");
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    require(nu(i) == 0 || mu(i) > 0, "compare_measures_bound: nu must be absolutely continuous w.r.t. mu");
  double tail = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double w = nu(i) > 0 ? mu(i) / nu(i) : (mu(i) > 0 ? kInf : 0.0);
    if (w > s) tail += mu(i);
  }
  const double o = osc(f);
  return s * variance(nu, f) + tail * o * o;
}

}  // namespace subgeo
