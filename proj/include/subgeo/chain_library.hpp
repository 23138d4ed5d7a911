// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Named finite chains used as oracles and fixtures.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subgeo/errors.hpp"
#include "subgeo/finite_chain.hpp"

namespace subgeo {

inline FiniteChain identity_chain(const Eigen::VectorXd& mu) {
  const auto n = mu.size();
  return make_chain(Eigen::MatrixXd::Identity(n, n), mu, {}, true);
}

// P(x, .) = mu.
inline FiniteChain independent_chain(const Eigen::VectorXd& mu) {
  const auto n = mu.size();
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) P.row(i) = mu.transpose();
  return make_chain(std::move(P), mu, {}, true);
}

inline Eigen::VectorXd uniform_law(std::size_t n) {
  return Eigen::VectorXd::Constant(Eigen::Index(n), 1.0 / double(n));
}

// P = [[1-p, p], [q, 1-q]], mu = (q, p) / (p + q).
inline FiniteChain two_state_chain(double p, double q) {
  require(p > 0 && p <= 1 && q > 0 && q <= 1, "two_state_chain: p, q must lie in (0, 1]");
  Eigen::MatrixXd P(2, 2);
  P << 1 - p, p, q, 1 - q;
  Eigen::VectorXd mu(2);
  mu << q / (p + q), p / (p + q);
  return make_chain(std::move(P), std::move(mu), {"0", "1"}, true);
}

// Deterministic rotation x -> x + 1 mod m.
inline FiniteChain circle_walk(std::size_t m) {
  require(m >= 2, "circle_walk: need m >= 2");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
  for (std::size_t x = 0; x < m; ++x) P(Eigen::Index(x), Eigen::Index((x + 1) % m)) = 1.0;
  return make_chain(std::move(P), uniform_law(m));
}

// Reversible chain from a random symmetric conductance matrix on a ring plus
// random chords, made lazy by `lazy_eps`.
inline FiniteChain random_reversible_chain(std::size_t n, std::mt19937_64& rng, double lazy_eps = 0.5,
                                           double chord_prob = 0.6) {
  require(n >= 2, "random_reversible_chain: need n >= 2");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::lognormal_distribution<double> W(0.0, 1.0);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const bool ring = j == i + 1 || (i == 0 && j == n - 1);
      if (j == i || ring || U(rng) < chord_prob) {
        const double w = W(rng);
        C(Eigen::Index(i), Eigen::Index(j)) = w;
        C(Eigen::Index(j), Eigen::Index(i)) = w;
      }
    }
  const Eigen::VectorXd deg = C.rowwise().sum();
  Eigen::MatrixXd P = deg.asDiagonal().inverse() * C;
  Eigen::VectorXd mu = deg / deg.sum();
  // Renormalise so rows sum to 1 to machine precision.
  for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) /= P.row(i).sum();
  FiniteChain c = make_chain(std::move(P), std::move(mu), {}, true);
  return lazy_eps > 0 ? lazy(c, lazy_eps) : c;
}

// Independent Metropolis-Hastings with proposal nu and target mu:
// P(x, y) = nu(y) min(1, w(y) / w(x)), w = mu / nu.
inline FiniteChain imh_chain(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
  require(mu.size() == nu.size(), "imh_chain: length mismatch");
  const auto n = mu.size();
  for (Eigen::Index i = 0; i < n; ++i) require(mu(i) > 0 && nu(i) > 0, "imh_chain: laws must be positive");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double stay = 1.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      const double wx = mu(x) / nu(x), wy = mu(y) / nu(y);
      P(x, y) = nu(y) * std::min(1.0, wy / wx);
      stay -= P(x, y);
    }
    P(x, x) = std::max(0.0, stay);
  }
  return make_chain(std::move(P), mu, {}, true);
}

// ---------------------------------------------------------------------------
// Level chain: moves right along level i until (i, i), then restarts at
// (K, 1) with K ~ nu.

struct LevelChain {
  FiniteChain chain;
  std::vector<std::pair<int, int>> coords;  // (i, j), 1 <= j <= i <= K
  int K = 0;
  std::size_t index(int i, int j) const {
    return std::size_t((i - 1) * i / 2 + (j - 1));
  }
};

inline LevelChain counterexample_chain(const std::vector<double>& nu) {
  const int K = int(nu.size());
  require(K >= 2, "counterexample_chain: nu needs support {1..K} with K >= 2");
  require(nu[0] > 0 && nu[0] < 1, "counterexample_chain: nu(1) must lie in (0, 1)");
  double total = 0.0, mean_level = 0.0;
  for (int i = 1; i <= K; ++i) {
    require(nu[std::size_t(i - 1)] > 0, "counterexample_chain: nu must be positive on {1..K}");
    total += nu[std::size_t(i - 1)];
    mean_level += nu[std::size_t(i - 1)] * i;
  }
  require(std::abs(total - 1.0) <= 1e-12, "counterexample_chain: nu must sum to 1");
  LevelChain lc;
  lc.K = K;
  for (int i = 1; i <= K; ++i)
    for (int j = 1; j <= i; ++j) lc.coords.emplace_back(i, j);
  const auto n = Eigen::Index(lc.coords.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd mu(n);
  std::vector<std::string> labels;
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [i, j] = lc.coords[std::size_t(s)];
    mu(s) = nu[std::size_t(i - 1)] / mean_level;
    labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
    if (j < i) {
      P(s, Eigen::Index(lc.index(i, j + 1))) = 1.0;
    } else {
      for (int k = 1; k <= K; ++k) P(s, Eigen::Index(lc.index(k, 1))) = nu[std::size_t(k - 1)];
    }
  }
  lc.chain = make_chain(std::move(P), std::move(mu), std::move(labels));
  return lc;
}

// nu(i) proportional to (1 - r) r^{i-1} on {1..K}.
inline std::vector<double> truncated_geometric(int K, double r) {
  require(K >= 1 && r > 0 && r < 1, "truncated_geometric: need K >= 1 and r in (0, 1)");
  std::vector<double> nu(static_cast<std::size_t>(K));
  double s = 0.0;
  for (int i = 0; i < K; ++i) s += nu[std::size_t(i)] = (1 - r) * std::pow(r, i);
  for (auto& v : nu) v /= s;
  return nu;
}

struct ProductReducibility {
  int k = 0;
  bool diagonal_absorbing = true;   // (P*)^k P^k (i,i; i,i) == 1 for all i > k
  double min_diagonal = 1.0;
  std::vector<int> levels_checked;
  double dirichlet = 0.0;           // E((P*)^k P^k, f_k)
  double f_norm2 = 0.0;             // ||f_k||_2^2
  bool is_rupi = false;
  std::string witness;
};

inline ProductReducibility check_product_reducibility(const LevelChain& lc, int k) {
  require(k >= 1 && k < lc.K, "check_product_reducibility: need 1 <= k < K");
  const FiniteChain T = power_product(lc.chain, k);
  ProductReducibility r;
  r.k = k;
  const std::size_t n = lc.chain.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(Eigen::Index(n));
  for (int i = k + 1; i <= lc.K; ++i) {
    const auto s = Eigen::Index(lc.index(i, i));
    r.levels_checked.push_back(i);
    r.min_diagonal = std::min(r.min_diagonal, T.P(s, s));
    if (T.P(s, s) != 1.0) r.diagonal_absorbing = false;
    f(s) = 1.0;
  }
  f.array() -= mean(lc.chain.mu, f);
  r.dirichlet = dirichlet_form(T, f);
  r.f_norm2 = lc.chain.mu.dot(f.cwiseProduct(f));
  const RupiVerdict v = rupi_check(T, int(n));
  r.is_rupi = v.is_rupi;
  r.witness = v.witness_label;
  return r;
}

// ---------------------------------------------------------------------------
// Jump chain on [1, inf): P(x, .) = w(x) nu + (1 - w(x)) delta_x with
// nu(x) = (a-1) x^{-a}, w(x) = x^{-b}, discretized on a geometric grid.

struct JumpGrid {
  FiniteChain chain;
  double a = 0, b = 0;
  std::vector<double> x;   // left endpoints of the cells
  Eigen::VectorXd nu;      // renormalized cell masses of nu
  Eigen::VectorXd w;       // w(x_i) = x_i^{-b}
  double nu_tail = 0.0;    // discarded nu-mass beyond grid_max
  double mu_tail = 0.0;    // discarded mass of the continuous mu
};

inline JumpGrid jump_chain(double a, double b, double grid_max, double grid_step) {
  require(a > 1, "jump_chain: need a > 1");
  require(b > 0 && b < a - 1, "jump_chain: need 0 < b < a - 1");
  require(grid_max > 1 && grid_step > 1, "jump_chain: need grid_max > 1 and grid_step > 1");
  JumpGrid g;
  g.a = a;
  g.b = b;
  const std::size_t cells = std::size_t(std::ceil(std::log(grid_max) / std::log(grid_step) - 1e-12));
  require(cells >= 2 && cells <= 20000, "jump_chain: grid must have between 2 and 20000 cells");
  for (std::size_t i = 0; i < cells; ++i) g.x.push_back(std::pow(grid_step, double(i)));
  const auto n = Eigen::Index(cells);
  g.nu.resize(n);
  g.w.resize(n);
  auto tail = [&](double t) { return std::pow(t, -(a - 1)); };  // nu([t, inf))
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = g.x[std::size_t(i)];
    const double hi = i + 1 < n ? g.x[std::size_t(i + 1)] : grid_max;
    g.nu(i) = tail(lo) - tail(hi);
    g.w(i) = std::pow(lo, -b);
  }
  g.nu_tail = tail(grid_max);
  g.mu_tail = std::pow(grid_max, -(a - b - 1));
  g.nu /= g.nu.sum();
  Eigen::VectorXd mu = g.nu.cwiseQuotient(g.w);
  mu /= mu.sum();
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    P.row(i) = g.w(i) * g.nu.transpose();
    P(i, i) += 1 - g.w(i);
  }
  std::vector<std::string> labels;
  for (double x : g.x) labels.push_back(std::to_string(x));
  g.chain = make_chain(std::move(P), std::move(mu), std::move(labels), true);
  return g;
}

struct DriftReport {
  double k = 0, alpha = 0, x0 = 0, nu_V = 0;
  double max_violation = 0.0;  // max of PV - (V - V^alpha / 2 + nu(V) 1_C), <= 0 when the drift holds
  bool holds = false;
};

// Checks PV <= V - V^alpha / 2 + nu(V) 1_C for V = x^k, alpha = 1 - b / k,
// C = [1, x0], x0 = (2 nu(V))^{1 / (k alpha)}.
inline DriftReport jump_drift_check(const JumpGrid& g, double k) {
  require(k > g.b && k < g.a - 1, "jump_drift_check: need b < k < a - 1");
  DriftReport r;
  r.k = k;
  r.alpha = 1 - g.b / k;
  const auto n = g.nu.size();
  Eigen::VectorXd V(n);
  for (Eigen::Index i = 0; i < n; ++i) V(i) = std::pow(g.x[std::size_t(i)], k);
  r.nu_V = g.nu.dot(V);
  r.x0 = std::pow(2 * r.nu_V, 1.0 / (k * r.alpha));
  const Eigen::VectorXd PV = g.chain.P * V;
  r.max_violation = -kInf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double inC = g.x[std::size_t(i)] <= r.x0 ? 1.0 : 0.0;
    const double rhs = V(i) - 0.5 * std::pow(V(i), r.alpha) + r.nu_V * inC;
    r.max_violation = std::max(r.max_violation, (PV(i) - rhs) / std::max(1.0, V(i)));
  }
  r.holds = r.max_violation <= 1e-12;
  return r;
}

}  // namespace subgeo
