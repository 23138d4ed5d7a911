// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded simulation of random walk Metropolis, independent Metropolis-
// Hastings, pseudo-marginal RWM and the one-dimensional jump chain, plus
// empirical diagnostics: nested Monte Carlo decay curves, a coupling TV
// proxy, batch-means asymptotic variance and a Kolmogorov-Smirnov helper.
//
// Every replica owns a std::mt19937_64 seeded from (seed, replica), so
// output is a function of the configuration alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subgeo/errors.hpp"
#include "subgeo/finite_chain.hpp"
#include "subgeo/heavytail.hpp"
#include "subgeo/numerics.hpp"

namespace subgeo {

using Rng = std::mt19937_64;

inline Rng replica_rng(std::uint64_t seed, std::uint64_t replica, std::uint64_t stream = 0) {
  std::seed_seq ss{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(replica),
                   std::uint32_t(replica >> 32), std::uint32_t(stream)};
  return Rng(ss);
}

// Uniform on (0, 1), never exactly 0, so logs and inverse cdfs stay finite.
inline double uniform_open(Rng& rng) {
  return (double(rng() >> 11) + 0.5) * 0x1.0p-53;
}

enum class KernelKind { rwm, imh, pm_rwm, jump };
enum class InitKind { warm, point, offset };

inline const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::rwm: return "rwm";
    case KernelKind::imh: return "imh";
    case KernelKind::pm_rwm: return "pm_rwm";
    case KernelKind::jump: return "jump";
  }
  return "?";
}
inline const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::warm: return "warm";
    case InitKind::point: return "point";
    case InitKind::offset: return "offset";
  }
  return "?";
}

// Law of the pseudo-marginal weight; unit mean is enforced.
struct WeightSpec {
  enum class Kind { degenerate, pareto, discrete };
  Kind kind = Kind::degenerate;
  double alpha = 2.0;  // Pareto(alpha, 1 - 1/alpha)
  std::vector<double> atoms, probs;

  void validate() const {
    if (kind == Kind::pareto) {
      require(alpha > 1, "weights: Pareto alpha must exceed 1");
      const double xm = 1 - 1 / alpha;
      require(std::abs(xm * alpha / (alpha - 1) - 1) < 1e-12, "weights: Pareto mean must be 1");
    }
    if (kind == Kind::discrete) {
      require(!atoms.empty() && atoms.size() == probs.size(), "weights: atoms and probs must match");
      double p = 0, m = 0;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        require(atoms[k] > 0 && probs[k] > 0, "weights: atoms and probs must be positive");
        p += probs[k];
        m += probs[k] * atoms[k];
      }
      require(std::abs(p - 1) < 1e-12, "weights: probabilities must sum to 1");
      require(std::abs(m - 1) < 1e-10, "weights: mean must be 1");
    }
  }

  double draw(Rng& rng) const {
    switch (kind) {
      case Kind::degenerate: return 1.0;
      case Kind::pareto: return (1 - 1 / alpha) * std::pow(uniform_open(rng), -1 / alpha);
      case Kind::discrete: {
        double u = uniform_open(rng), acc = 0;
        for (std::size_t k = 0; k < atoms.size(); ++k)
          if ((acc += probs[k]) >= u) return atoms[k];
        return atoms.back();
      }
    }
    return 1.0;
  }

  // Draw from the size-biased law w Q(dw), the stationary weight marginal.
  double draw_size_biased(Rng& rng) const {
    switch (kind) {
      case Kind::degenerate: return 1.0;
      case Kind::pareto: return (1 - 1 / alpha) * std::pow(uniform_open(rng), -1 / (alpha - 1));
      case Kind::discrete: {
        double u = uniform_open(rng), acc = 0;
        for (std::size_t k = 0; k < atoms.size(); ++k)
          if ((acc += probs[k] * atoms[k]) >= u) return atoms[k];
        return atoms.back();
      }
    }
    return 1.0;
  }
};

struct SimConfig {
  KernelKind kernel = KernelKind::rwm;
  TargetSpec target;
  double jump_a = 4.0, jump_b = 1.0;  // jump chain parameters
  double sigma = 0.0;                 // 0 selects varsigma (L d)^{-1/2}
  double varsigma = 1.0;
  double imh_scale = 0.0;             // 0: propose from the target itself
  WeightSpec weights;
  std::size_t n_steps = 1000;
  std::size_t n_replicas = 1;
  std::uint64_t seed = 1;
  InitKind init = InitKind::warm;
  std::vector<double> init_point;
  double offset = 0.0;
  std::size_t thin = 1;

  int dim() const { return kernel == KernelKind::jump ? 1 : target.d; }

  void validate() const {
    require(n_replicas >= 1, "SimConfig: need at least one replica");
    require(thin >= 1, "SimConfig: thin must be at least 1");
    if (kernel == KernelKind::jump) {
      require(jump_a > 1 && jump_b > 0 && jump_b < jump_a - 1, "SimConfig: jump chain needs a > 1 and 0 < b < a - 1");
    } else {
      target.validate();
      require(target.family != Family::custom, "SimConfig: samplers need a named target family");
      require(sigma >= 0 && varsigma > 0, "SimConfig: step size must be nonnegative");
      require(imh_scale >= 0, "SimConfig: imh_scale must be nonnegative");
    }
    if (kernel == KernelKind::pm_rwm) weights.validate();
    if (init == InitKind::point) require(int(init_point.size()) == dim(), "SimConfig: init_point has the wrong length");
    if (init == InitKind::point && kernel == KernelKind::jump)
      require(init_point[0] >= 1, "SimConfig: jump chain lives on [1, inf)");
  }

  double step_size() const {
    if (sigma > 0 || kernel == KernelKind::imh) return sigma;
    const double L = smoothness_constant(target);
    return varsigma / std::sqrt(L * target.d);
  }
};

// ---------------------------------------------------------------------------
// Exact draws from the named targets.

inline void sample_target(const TargetSpec& t, Rng& rng, double* x) {
  std::normal_distribution<double> N(0.0, 1.0);
  switch (t.family) {
    case Family::student_t:
    case Family::cauchy_type: {
      // Multivariate t: Z sqrt(nu / chi2_nu); cauchy_type is t_eta scaled by eta^{-1/2}.
      const double nu = t.family == Family::student_t ? t.tau : t.eta;
      std::chi_squared_distribution<double> C(nu);
      const double s = t.family == Family::student_t ? std::sqrt(nu / C(rng)) : std::sqrt(1 / C(rng));
      for (int i = 0; i < t.d; ++i) x[i] = N(rng) * s;
      return;
    }
    case Family::product_student: {
      std::chi_squared_distribution<double> C(t.eta);
      for (int i = 0; i < t.d; ++i) x[i] = N(rng) / std::sqrt(C(rng));
      return;
    }
    case Family::subexp_product: {
      // Envelope exp(-|x|^eta): |x|^eta ~ Gamma(1/eta). The ratio
      // exp(|x|^eta - (tau + x^2)^{eta/2}) lies in [exp(-tau^{eta/2}), 1].
      std::gamma_distribution<double> G(1 / t.eta, 1.0);
      for (int i = 0; i < t.d; ++i) {
        for (;;) {
          const double y = std::pow(G(rng), 1 / t.eta);
          const double logr = std::pow(y, t.eta) - std::pow(t.tau + y * y, t.eta / 2);
          if (std::log(uniform_open(rng)) < logr) {
            x[i] = uniform_open(rng) < 0.5 ? -y : y;
            break;
          }
        }
      }
      return;
    }
    case Family::custom: break;
  }
  throw ValidationError("sample_target: the custom family cannot be sampled");
}

// ---------------------------------------------------------------------------
// Trajectories.

struct Trajectory {
  std::vector<double> x;               // kept states, dim per row (jump chain: log x)
  std::vector<std::uint8_t> accepted;  // one per step (jump chain: jumped)
  std::vector<double> weight;          // pseudo-marginal weight per kept row
  std::size_t accepts = 0;
  std::size_t longest_rejection_streak = 0;
};

struct Ensemble {
  int dim = 1;
  std::size_t n_steps = 0, thin = 1;
  std::string kernel;
  std::vector<Trajectory> replicas;

  double acceptance() const {
    double a = 0, n = 0;
    for (const auto& r : replicas) {
      a += double(r.accepts);
      n += double(r.accepted.size());
    }
    return n > 0 ? a / n : 0.0;
  }
};

namespace detail {

inline void initial_state(const SimConfig& c, Rng& rng, double* x) {
  const int d = c.dim();
  if (c.init == InitKind::point) {
    std::copy(c.init_point.begin(), c.init_point.end(), x);
    return;
  }
  if (c.kernel == KernelKind::jump) {
    x[0] = std::pow(uniform_open(rng), -1 / (c.jump_a - c.jump_b - 1));
  } else {
    sample_target(c.target, rng, x);
  }
  if (c.init == InitKind::offset)
    for (int i = 0; i < d; ++i) x[i] += c.offset;
}

struct Recorder {
  Trajectory& t;
  std::size_t thin;
  std::size_t streak = 0;
  void accept(bool a) {
    t.accepted.push_back(a ? 1 : 0);
    if (a) {
      ++t.accepts;
      streak = 0;
    } else {
      t.longest_rejection_streak = std::max(t.longest_rejection_streak, ++streak);
    }
  }
  void keep(std::size_t step, const double* x, int d, double w = -1) {
    if (step % thin) return;
    t.x.insert(t.x.end(), x, x + d);
    if (w >= 0) t.weight.push_back(w);
  }
};

inline void check_finite(double u) {
  if (!std::isfinite(u)) throw NumericalError("sampler: non-finite potential at a visited point");
}

template <class Run>
Ensemble run_replicas(const SimConfig& c, Run&& run) {
  c.validate();
  Ensemble e;
  e.dim = c.dim();
  e.n_steps = c.n_steps;
  e.thin = c.thin;
  e.kernel = kernel_name(c.kernel);
  e.replicas.resize(c.n_replicas);
  parallel_for(c.n_replicas, [&](std::size_t r) {
    Rng rng = replica_rng(c.seed, r);
    Recorder rec{e.replicas[r], c.thin};
    rec.t.accepted.reserve(c.n_steps);
    rec.t.x.reserve((c.n_steps / c.thin + 1) * std::size_t(e.dim));
    run(rng, rec);
  });
  return e;
}

}  // namespace detail

// RWM: y = x + sigma z, accepted when log U < U(x) - U(y).
inline Ensemble run_rwm(SimConfig c) {
  c.kernel = KernelKind::rwm;
  const double sigma = c.step_size();
  return detail::run_replicas(c, [&](Rng& rng, detail::Recorder& rec) {
    const int d = c.target.d;
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
    detail::initial_state(c, rng, x.data());
    double ux = potential(c.target, x.data());
    detail::check_finite(ux);
    rec.keep(0, x.data(), d);
    for (std::size_t s = 1; s <= c.n_steps; ++s) {
      for (int i = 0; i < d; ++i) y[std::size_t(i)] = x[std::size_t(i)] + sigma * N(rng);
      const double uy = potential(c.target, y.data());
      detail::check_finite(uy);
      const bool a = std::log(uniform_open(rng)) < ux - uy;
      if (a) {
        x.swap(y);
        ux = uy;
      }
      rec.accept(a);
      rec.keep(s, x.data(), d);
    }
  });
}

// Jump chain on [1, inf): with probability x^{-b} jump to nu = Pareto(a - 1)
// drawn by inverse cdf, otherwise hold. States are recorded as log x.
inline Ensemble run_jump_chain(double a, double b, SimConfig c) {
  c.kernel = KernelKind::jump;
  c.jump_a = a;
  c.jump_b = b;
  return detail::run_replicas(c, [&](Rng& rng, detail::Recorder& rec) {
    double x;
    detail::initial_state(c, rng, &x);
    double lx = std::log(x);
    rec.keep(0, &lx, 1);
    for (std::size_t s = 1; s <= c.n_steps; ++s) {
      const bool jump = std::log(uniform_open(rng)) < -b * lx;
      if (jump) lx = -std::log(uniform_open(rng)) / (a - 1);
      rec.accept(jump);
      rec.keep(s, &lx, 1);
    }
  });
}

// Pseudo-marginal RWM on (x, w): propose y ~ N(x, sigma^2), u ~ Q and accept
// with probability min{1, pi(y) u / (pi(x) w)}.
inline Ensemble run_pm(SimConfig c) {
  c.kernel = KernelKind::pm_rwm;
  const double sigma = c.step_size();
  return detail::run_replicas(c, [&](Rng& rng, detail::Recorder& rec) {
    const int d = c.target.d;
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
    detail::initial_state(c, rng, x.data());
    double w = c.init == InitKind::point ? c.weights.draw(rng) : c.weights.draw_size_biased(rng);
    double ux = potential(c.target, x.data());
    detail::check_finite(ux);
    rec.keep(0, x.data(), d, w);
    for (std::size_t s = 1; s <= c.n_steps; ++s) {
      for (int i = 0; i < d; ++i) y[std::size_t(i)] = x[std::size_t(i)] + sigma * N(rng);
      const double u = c.weights.draw(rng);
      const double uy = potential(c.target, y.data());
      detail::check_finite(uy);
      const bool a = std::log(uniform_open(rng)) < ux - uy + std::log(u) - std::log(w);
      if (a) {
        x.swap(y);
        ux = uy;
        w = u;
      }
      rec.accept(a);
      rec.keep(s, x.data(), d, w);
    }
  });
}

// Log importance weight log(d pi / d nu) up to a constant for IMH with
// proposal N(0, s^2 I); s = 0 means nu = pi and the weight is constant.
inline double imh_log_weight(const SimConfig& c, const double* x) {
  if (c.imh_scale == 0) return 0.0;
  double r2 = 0;
  for (int i = 0; i < c.target.d; ++i) r2 += x[i] * x[i];
  return -potential(c.target, x) + r2 / (2 * c.imh_scale * c.imh_scale);
}

inline Ensemble run_imh(SimConfig c) {
  c.kernel = KernelKind::imh;
  return detail::run_replicas(c, [&](Rng& rng, detail::Recorder& rec) {
    const int d = c.target.d;
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
    detail::initial_state(c, rng, x.data());
    double lx = imh_log_weight(c, x.data());
    rec.keep(0, x.data(), d);
    for (std::size_t s = 1; s <= c.n_steps; ++s) {
      if (c.imh_scale == 0) {
        sample_target(c.target, rng, y.data());
      } else {
        for (int i = 0; i < d; ++i) y[std::size_t(i)] = c.imh_scale * N(rng);
      }
      const double ly = imh_log_weight(c, y.data());
      detail::check_finite(ly);
      const bool a = std::log(uniform_open(rng)) < ly - lx;
      if (a) {
        x.swap(y);
        lx = ly;
      }
      rec.accept(a);
      rec.keep(s, x.data(), d);
    }
  });
}

inline Ensemble simulate(const SimConfig& c) {
  switch (c.kernel) {
    case KernelKind::rwm: return run_rwm(c);
    case KernelKind::imh: return run_imh(c);
    case KernelKind::pm_rwm: return run_pm(c);
    case KernelKind::jump: return run_jump_chain(c.jump_a, c.jump_b, c);
  }
  throw ValidationError("simulate: unknown kernel");
}

// ---------------------------------------------------------------------------
// Nested Monte Carlo decay estimates.
//
// ||P^n f - mu(f)||_2^2 = E_mu[g_n(X_0)^2] with g_n(x) = E_x f(X_n) - mu(f).
// Each outer draw X_0 (possibly importance-weighted) gets `inner` replicated
// differences D = f(X_n) - f(Y_n), where Y is a stationary copy driven by the
// same random numbers, so E[D | X_0] = g_n(X_0). With inner mean m and
// variance s^2, m^2 - s^2 / inner is unbiased for g_n(X_0)^2; the naive m^2
// is biased upwards by Var(D | X_0) / inner.

struct NestedOptions {
  std::size_t outer = 256, inner = 256, bootstrap = 200;
  std::uint64_t seed = 1;
  double level = 0.95;
};

struct DecayPoint {
  int n = 0;
  double value = 0, lo = 0, hi = 0, se = 0;
};

struct DecayEstimate {
  std::vector<DecayPoint> points;
  std::vector<DecayPoint> tv;  // P(no coalescence by n), when a coupling is used
  std::size_t outer = 0, inner = 0;
};

namespace detail {

// per_outer[i][j]: contribution of outer draw i at grid point j (already
// importance weighted). Mean with percentile bootstrap over outer draws.
inline std::vector<DecayPoint> summarise_outer(const std::vector<std::vector<double>>& per_outer,
                                               const std::vector<int>& n_grid, const NestedOptions& opt,
                                               std::uint64_t stream) {
  const std::size_t M = per_outer.size(), J = n_grid.size();
  std::vector<DecayPoint> out(J);
  Rng rng = replica_rng(opt.seed, 0xB007, stream);
  std::uniform_int_distribution<std::size_t> pick(0, M - 1);
  std::vector<std::vector<double>> boot(J, std::vector<double>(opt.bootstrap));
  std::vector<double> col(M);
  for (std::size_t b = 0; b < opt.bootstrap; ++b) {
    std::vector<std::size_t> idx(M);
    for (auto& i : idx) i = pick(rng);
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t k = 0; k < M; ++k) col[k] = per_outer[idx[k]][j];
      boot[j][b] = pairwise_sum(col) / double(M);
    }
  }
  const double alpha = (1 - opt.level) / 2;
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < M; ++k) col[k] = per_outer[k][j];
    const double m = pairwise_sum(col) / double(M);
    double v = 0;
    for (double c : col) v += (c - m) * (c - m);
    out[j].n = n_grid[j];
    out[j].value = m;
    out[j].se = std::sqrt(v / double(M) / double(std::max<std::size_t>(M - 1, 1)));
    auto& bs = boot[j];
    std::sort(bs.begin(), bs.end());
    if (!bs.empty()) {
      out[j].lo = bs[std::size_t(alpha * double(bs.size() - 1))];
      out[j].hi = bs[std::size_t((1 - alpha) * double(bs.size() - 1))];
    }
  }
  return out;
}

inline void check_nested(const std::vector<int>& n_grid, const NestedOptions& opt) {
  require(!n_grid.empty(), "empirical_decay: empty n grid");
  require(std::is_sorted(n_grid.begin(), n_grid.end()) && n_grid.front() >= 0, "empirical_decay: n grid must be sorted");
  require(opt.outer >= 8 && opt.inner >= 2, "empirical_decay: need at least 8 outer and 2 inner replicas for a CI");
  require(opt.bootstrap >= 20, "empirical_decay: need at least 20 bootstrap resamples");
}

inline double debiased_square(double sum, double sum2, std::size_t K) {
  const double m = sum / double(K);
  const double s2 = (sum2 - double(K) * m * m) / double(K - 1);
  return m * m - s2 / double(K);
}

}  // namespace detail

// Finite chain, X_0 ~ mu. Inner pairs (X, Y) with Y_0 ~ mu share the uniform
// used by the inverse-cdf step, so the pair often coalesces.
inline DecayEstimate empirical_decay(const FiniteChain& c, const Eigen::VectorXd& f, const std::vector<int>& n_grid,
                                     const NestedOptions& opt = {}) {
  c.validate();
  require(std::size_t(f.size()) == c.size(), "empirical_decay: f has the wrong length");
  detail::check_nested(n_grid, opt);
  const auto n = Eigen::Index(c.size());
  std::vector<std::vector<double>> cdf(c.size(), std::vector<double>(c.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0;
    for (Eigen::Index j = 0; j < n; ++j) cdf[std::size_t(i)][std::size_t(j)] = (acc += c.P(i, j));
    cdf[std::size_t(i)].back() = 1.0;
  }
  std::vector<double> mu_cdf(c.size());
  {
    double acc = 0;
    for (Eigen::Index j = 0; j < n; ++j) mu_cdf[std::size_t(j)] = (acc += c.mu(j));
    mu_cdf.back() = 1.0;
  }
  auto draw = [](const std::vector<double>& cd, double u) {
    return std::size_t(std::lower_bound(cd.begin(), cd.end(), u) - cd.begin());
  };
  const std::size_t J = n_grid.size();
  std::vector<std::vector<double>> per(opt.outer, std::vector<double>(J));
  parallel_for(opt.outer, [&](std::size_t o) {
    Rng rng = replica_rng(opt.seed, o);
    const std::size_t x0 = draw(mu_cdf, uniform_open(rng));
    std::vector<double> s1(J, 0.0), s2(J, 0.0);
    for (std::size_t k = 0; k < opt.inner; ++k) {
      std::size_t x = x0, y = draw(mu_cdf, uniform_open(rng));
      int t = 0;
      for (std::size_t j = 0; j < J; ++j) {
        for (; t < n_grid[j]; ++t) {
          const double u = uniform_open(rng);
          x = draw(cdf[x], u);
          y = draw(cdf[y], u);
        }
        const double D = f(Eigen::Index(x)) - f(Eigen::Index(y));
        s1[j] += D;
        s2[j] += D * D;
      }
    }
    for (std::size_t j = 0; j < J; ++j) per[o][j] = detail::debiased_square(s1[j], s2[j], opt.inner);
  });
  DecayEstimate e;
  e.points = detail::summarise_outer(per, n_grid, opt, 1);
  e.outer = opt.outer;
  e.inner = opt.inner;
  return e;
}

struct JumpDecayOptions {
  NestedOptions nested;
  double f_hi = 2.0;       // f = 1_[1, f_hi]
  double is_xmax = 1e7;    // log-uniform outer proposal on [1, is_xmax]
  double is_mix = 0.5;     // probability of drawing the outer X_0 from mu
};

// Jump chain (a, b) with the coupling that shares the holding uniform and the
// nu draw: X and Y jump together when U < min(w(X), w(Y)) and then coincide.
// Holding periods are skipped geometrically. Outer draws come from a mixture
// of mu and a log-uniform law, weighted by d mu / dq, so the far tail that
// drives the large-n decay is visited. Also returns the coupling TV proxy
// P(X and Y not coalesced by n), averaged over X_0 ~ mu.
inline DecayEstimate empirical_decay_jump(double a, double b, const std::vector<int>& n_grid,
                                          const JumpDecayOptions& jo = {}) {
  require(a > 1 && b > 0 && b < a - 1, "empirical_decay_jump: need a > 1 and 0 < b < a - 1");
  require(jo.f_hi > 1 && jo.is_xmax > 1 && jo.is_mix > 0 && jo.is_mix <= 1, "empirical_decay_jump: bad options");
  const NestedOptions& opt = jo.nested;
  detail::check_nested(n_grid, opt);
  const double k = a - b - 1;                  // mu density k x^{-(k+1)}
  const double Lmax = std::log(jo.is_xmax);
  auto mu_pdf = [&](double x) { return k * std::pow(x, -(k + 1)); };
  auto q_pdf = [&](double x) {
    return jo.is_mix * mu_pdf(x) + (1 - jo.is_mix) * (x <= jo.is_xmax ? 1 / (x * Lmax) : 0.0);
  };
  auto nu_draw = [&](Rng& r) { return std::pow(uniform_open(r), -1 / (a - 1)); };
  auto mu_draw = [&](Rng& r) { return std::pow(uniform_open(r), -1 / k); };
  auto f = [&](double x) { return x <= jo.f_hi ? 1.0 : 0.0; };
  const std::size_t J = n_grid.size();
  std::vector<std::vector<double>> per(opt.outer, std::vector<double>(J)), tv(opt.outer, std::vector<double>(J));
  parallel_for(opt.outer, [&](std::size_t o) {
    Rng rng = replica_rng(opt.seed, o, 1);
    const double x0 = uniform_open(rng) < jo.is_mix ? mu_draw(rng) : std::exp(Lmax * uniform_open(rng));
    const double iw = mu_pdf(x0) / q_pdf(x0);
    std::vector<double> s1(J, 0.0), s2(J, 0.0), nc(J, 0.0);
    for (std::size_t r = 0; r < opt.inner; ++r) {
      double x = x0, y = mu_draw(rng);
      long long t = 0;  // current time
      bool coalesced = false;
      std::size_t j = 0;
      while (j < J) {
        if (coalesced || x == y) {
          coalesced = true;
          for (; j < J; ++j) {
            s1[j] += 0;
            s2[j] += 0;
          }
          break;
        }
        // Next event: U < max(w(x), w(y)); geometric waiting time.
        const double wx = std::pow(x, -b), wy = std::pow(y, -b), wmax = std::max(wx, wy);
        const long long wait =
            wmax >= 1 ? 1 : 1 + (long long)std::floor(std::log(uniform_open(rng)) / std::log1p(-wmax));
        const long long t_next = t + wait;
        for (; j < J && n_grid[j] < t_next; ++j) {
          const double D = f(x) - f(y);
          s1[j] += D;
          s2[j] += D * D;
          nc[j] += 1;
        }
        if (j >= J) break;
        t = t_next;
        // Given an event at level wmax, both jump with probability wmin / wmax.
        const double z = nu_draw(rng);
        if (uniform_open(rng) * wmax < std::min(wx, wy)) {
          x = y = z;
        } else if (wx > wy) {
          x = z;
        } else {
          y = z;
        }
      }
    }
    for (std::size_t jj = 0; jj < J; ++jj) {
      per[o][jj] = iw * detail::debiased_square(s1[jj], s2[jj], opt.inner);
      tv[o][jj] = iw * nc[jj] / double(opt.inner);
    }
  });
  DecayEstimate e;
  e.points = detail::summarise_outer(per, n_grid, opt, 2);
  e.tv = detail::summarise_outer(tv, n_grid, opt, 3);
  e.outer = opt.outer;
  e.inner = opt.inner;
  return e;
}

// Power-law exponent p of value ~ n^{-p}, fitted on the last `frac` of the grid.
inline LineFit decay_exponent(const std::vector<DecayPoint>& pts, double frac = 0.5) {
  std::vector<double> n, v;
  const std::size_t start = std::size_t(std::floor(double(pts.size()) * (1 - frac)));
  for (std::size_t i = start; i < pts.size(); ++i) {
    n.push_back(pts[i].n);
    v.push_back(pts[i].value);
  }
  LineFit fit = loglog_fit(n, v);
  fit.slope = -fit.slope;
  return fit;
}

// ---------------------------------------------------------------------------
// Batch means.

struct AsvarEstimate {
  double value = 0, lo = 0, hi = 0;
  std::size_t batches = 0, batch_size = 0;
};

// Batch-means estimate of var(P, f) with floor(sqrt(n)) batches; the CI uses
// the chi-square approximation with batches - 1 degrees of freedom.
inline AsvarEstimate batch_means_asvar(const std::vector<double>& fx) {
  const std::size_t n = fx.size();
  const std::size_t B = std::size_t(std::floor(std::sqrt(double(n))));
  require(B >= 100 && n / B >= 10, "batch_means_asvar: trajectory too short (need >= 100 batches of 10)");
  const std::size_t m = n / B;
  std::vector<double> means(B);
  for (std::size_t i = 0; i < B; ++i) means[i] = pairwise_sum(fx.data() + i * m, m) / double(m);
  const double grand = pairwise_sum(means) / double(B);
  double s2 = 0;
  for (double x : means) s2 += (x - grand) * (x - grand);
  s2 /= double(B - 1);
  AsvarEstimate e;
  e.batches = B;
  e.batch_size = m;
  e.value = double(m) * s2;
  const double z = 1.959963984540054, h = z * std::sqrt(2.0 / double(B - 1));
  e.lo = e.value * std::max(0.0, 1 - h);
  e.hi = e.value * (1 + h);
  return e;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov.

struct KsResult {
  double statistic = 0, p_value = 1;
};

// Asymptotic Kolmogorov tail P(K > lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1 : -1) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

inline KsResult ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
  require(!xs.empty(), "ks_test: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double D = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    D = std::max({D, double(i + 1) / n - F, F - double(i) / n});
  }
  const double sn = std::sqrt(n);
  return {D, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * D)};
}

}  // namespace subgeo
