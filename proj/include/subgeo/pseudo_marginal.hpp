// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pseudo-marginal lift of a finite Metropolis-Hastings chain and the
// conductance upper bound driven by the tail of varpi(x) * W.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subgeo/errors.hpp"
#include "subgeo/finite_chain.hpp"
#include "subgeo/monotone_fn.hpp"

namespace subgeo {

// Finite weight law Q_x: atoms with probabilities, unit mean.
struct WeightLaw {
  std::vector<double> atoms;
  std::vector<double> probs;

  void validate() const {
    require(!atoms.empty() && atoms.size() == probs.size(), "weight law: atoms and probs must match");
    double p = 0.0, m = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      require(atoms[k] > 0 && std::isfinite(atoms[k]), "weight law: atoms must be positive and finite");
      require(probs[k] > 0, "weight law: probabilities must be positive");
      p += probs[k];
      m += probs[k] * atoms[k];
    }
    require(std::abs(p - 1.0) <= 1e-12, "weight law: probabilities must sum to 1");
    require(std::abs(m - 1.0) <= 1e-10, "weight law: mean must be 1 (unbiased weights)");
  }

  static WeightLaw degenerate() { return {{1.0}, {1.0}}; }
};

// Pareto(alpha, x_m = 1 - 1/alpha) cut into `atoms` equal-probability bins,
// each represented by its conditional mean, so the mean stays exactly 1.
inline WeightLaw pareto_atoms(double alpha, std::size_t atoms) {
  require(alpha > 1, "pareto_atoms: alpha must exceed 1");
  require(atoms >= 1, "pareto_atoms: need at least one atom");
  const double xm = 1 - 1 / alpha;
  WeightLaw q;
  // Quantile q(u) = xm (1-u)^{-1/alpha}; int_{u0}^{u1} q(u) du in closed form.
  auto integral = [&](double u0, double u1) {
    const double e = 1 - 1 / alpha;
    return xm * (std::pow(1 - u0, e) - std::pow(1 - u1, e)) / e;
  };
  for (std::size_t k = 0; k < atoms; ++k) {
    const double u0 = double(k) / double(atoms), u1 = double(k + 1) / double(atoms);
    q.atoms.push_back(integral(u0, u1) / (u1 - u0));
    q.probs.push_back(1.0 / double(atoms));
  }
  double m = 0.0;
  for (std::size_t k = 0; k < atoms; ++k) m += q.atoms[k] * q.probs[k];
  for (auto& a : q.atoms) a /= m;  // removes rounding only
  return q;
}

// psi*^{-1}(v) = x_m v^{-1/(alpha-1)} for the Pareto(alpha, 1 - 1/alpha)
// tail of the size-biased law.
inline MonotoneFn pareto_psi_inverse(double alpha) {
  require(alpha > 1, "pareto_psi_inverse: alpha must exceed 1");
  return MonotoneFn(PowerLaw{1 - 1 / alpha, -1 / (alpha - 1)}, Direction::decreasing);
}

struct PmLift {
  FiniteChain chain;                                  // states (x, k)
  std::vector<std::pair<std::size_t, std::size_t>> index;  // (marginal state, atom)
  std::vector<double> level;                          // varpi(x) * w per lifted state
  double varpi_max = 0.0;
};

// Marginal MH chain from a nu-reversible proposal (given as a chain with
// mu = nu) and a density varpi = d pi / d nu.
inline FiniteChain mh_chain(const FiniteChain& proposal, const Eigen::VectorXd& varpi) {
  proposal.validate();
  const auto n = proposal.mu.size();
  require(varpi.size() == n, "mh_chain: varpi length mismatch");
  Eigen::VectorXd pi = varpi.cwiseProduct(proposal.mu);
  require(pi.minCoeff() > 0, "mh_chain: pi must be positive");
  pi /= pi.sum();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double stay = 1.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x || proposal.P(x, y) <= 0) continue;
      const double r = varpi(y) * proposal.P(y, x) / (varpi(x) * proposal.P(x, y));
      P(x, y) = proposal.P(x, y) * std::min(1.0, r);
      stay -= P(x, y);
    }
    P(x, x) = std::max(0.0, stay);
  }
  return make_chain(std::move(P), std::move(pi), proposal.states, true);
}

inline PmLift pm_lift(const FiniteChain& proposal, const Eigen::VectorXd& varpi, const std::vector<WeightLaw>& Q) {
  proposal.validate();
  require(proposal.reversible, "pm_lift: proposal must be reversible with respect to its mu (= nu)");
  const auto nx = proposal.mu.size();
  require(varpi.size() == nx && Q.size() == std::size_t(nx), "pm_lift: varpi and weight laws need one entry per state");
  for (const auto& q : Q) q.validate();
  Eigen::VectorXd pi = varpi.cwiseProduct(proposal.mu);
  require(pi.minCoeff() > 0, "pm_lift: varpi must be positive");
  pi /= pi.sum();
  PmLift L;
  L.varpi_max = varpi.maxCoeff();
  std::vector<std::string> labels;
  for (Eigen::Index x = 0; x < nx; ++x)
    for (std::size_t k = 0; k < Q[std::size_t(x)].atoms.size(); ++k) {
      L.index.emplace_back(std::size_t(x), k);
      L.level.push_back(varpi(x) * Q[std::size_t(x)].atoms[k]);
      labels.push_back(proposal.label(std::size_t(x)) + ":w" + std::to_string(k));
    }
  const auto n = Eigen::Index(L.index.size());
  Eigen::VectorXd mu(n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [x, k] = L.index[std::size_t(s)];
    const double w = Q[x].atoms[k];
    mu(s) = pi(Eigen::Index(x)) * Q[x].probs[k] * w;
    double stay = 1.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto [y, j] = L.index[std::size_t(t)];
      const double qxy = proposal.P(Eigen::Index(x), Eigen::Index(y));
      if (t == s || qxy <= 0) continue;
      const double u = Q[y].atoms[j];
      const double r = varpi(Eigen::Index(y)) * proposal.P(Eigen::Index(y), Eigen::Index(x)) /
                       (varpi(Eigen::Index(x)) * qxy);
      P(s, t) = qxy * Q[y].probs[j] * std::min(1.0, r * u / w);
      stay -= P(s, t);
    }
    P(s, s) = std::max(0.0, stay);
  }
  mu /= mu.sum();
  L.chain = make_chain(std::move(P), std::move(mu), std::move(labels), true);
  return L;
}

// psi^-(v) = sup{s > 0 : mu(varpi W >= s) >= v}; attained for finite laws.
inline double pm_psi_minus(const PmLift& L, double v) {
  require(v > 0 && v <= 1, "pm_psi_minus: v must lie in (0, 1]");
  std::vector<std::pair<double, double>> lv;
  for (std::size_t s = 0; s < L.level.size(); ++s) lv.emplace_back(L.level[s], L.chain.mu(Eigen::Index(s)));
  std::sort(lv.begin(), lv.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double mass = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    mass += lv[i].second;
    if (i + 1 < lv.size() && lv[i + 1].first == lv[i].first) continue;
    if (mass >= v * (1 - 1e-14)) return lv[i].first;
  }
  return lv.back().first;
}

struct PmBoundReport {
  std::vector<double> v, exact, bound, psi_minus;
  std::vector<double> set_mass;  // mu(A_{psi^-(v)})
  bool holds = true;
  std::size_t violations = 0;
};

// Exact weak conductance of the lift against varpi_max / psi^-(v).
inline PmBoundReport pm_conductance_bound(const PmLift& L, const std::vector<double>& v_grid,
                                          std::size_t cap = kDefaultSubsetCap) {
  const WeakConductance wc = weak_conductance_exact(L.chain, cap);
  PmBoundReport r;
  for (double v : v_grid) {
    require(v > 0 && v <= 0.5, "pm_conductance_bound: v must lie in (0, 1/2]");
    const double pm = pm_psi_minus(L, v);
    double mass = 0.0;
    for (std::size_t s = 0; s < L.level.size(); ++s)
      if (L.level[s] >= pm) mass += L.chain.mu(Eigen::Index(s));
    const double ex = wc.phi(v), b = L.varpi_max / pm;
    r.v.push_back(v);
    r.exact.push_back(ex);
    r.bound.push_back(b);
    r.psi_minus.push_back(pm);
    r.set_mass.push_back(mass);
    if (ex > b * (1 + 1e-12)) {
      r.holds = false;
      ++r.violations;
    }
  }
  return r;
}

}  // namespace subgeo
