// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion with its
// runtime and the key numbers; exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "subgeo/chain_library.hpp"
#include "subgeo/finite_chain.hpp"
#include "subgeo/heavytail.hpp"
#include "subgeo/pseudo_marginal.hpp"
#include "subgeo/samplers.hpp"
#include "subgeo/serialization.hpp"
#include "subgeo/weak_cheeger.hpp"
#include "subgeo/wpi.hpp"

using namespace subgeo;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [fail: " << what << "]";
    }
  }
};

int g_failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.note << " [exception: " << e.what() << "]";
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && dt > budget_s) {
    o.pass = false;
    o.note << " [over budget " << budget_s << " s]";
  }
  if (!o.pass) ++g_failures;
  std::printf("%s  %2d  %-28s %8.2f s %s\n", o.pass ? "PASS" : "FAIL", id, name, dt, o.note.str().c_str());
  std::fflush(stdout);
}

// The seeded family of lazy reversible chains on 4 to 6 states used by
// criteria 2, 3 and 10.
std::vector<FiniteChain> desk_chains() {
  std::vector<FiniteChain> out;
  std::mt19937_64 rng(20260);
  for (int i = 0; i < 100; ++i) out.push_back(random_reversible_chain(4 + std::size_t(i % 3), rng));
  return out;
}

std::string fmt_g(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", x);
  return b;
}

}  // namespace

int main() {
  std::printf("subgeo acceptance (threads: %zu)\n", std::size_t(thread_budget()));
  const std::vector<FiniteChain> chains = desk_chains();

  criterion(1, "polynomial-rate", 1.0, [](Outcome& o) {
    double worst_gamma = 0, worst_F = 0;
    for (double c0 : {0.5, 1.0, 2.0})
      for (double c1 : {0.5, 1.0, 2.0}) {
        const DecayProfile d = decay_profile(make_certificate(Param::beta, MonotoneFn::power(c0, -c1)));
        const double C = (c1 / (1 + c1)) * std::pow(c0 * (1 + c1), -1 / c1);
        for (double n : {1.0, 10.0, 100.0, 1000.0}) {
          const double env = c0 * std::pow(1 + c1, 1 + c1) * std::pow(n, -c1);
          const double g = d.gamma(n);
          worst_gamma = std::max(worst_gamma, g / env);
          const double closed = power_kstar_F(C, 1 + 1 / c1, 0.25, g);
          worst_F = std::max(worst_F, std::abs(d.F(g) - closed) / closed);
        }
      }
    o.check(worst_gamma <= 1 + 1e-12, "gamma above envelope");
    o.check(worst_F <= 0.01, "F differs from closed form");
    o.note << "max gamma/envelope " << fmt_g(worst_gamma) << ", max F rel err " << fmt_g(worst_F);
  });

  criterion(2, "weak-cheeger-soundness", 30.0, [&](Outcome& o) {
    std::size_t violations = 0, checks = 0;
    for (const FiniteChain& c : chains) {
      const MonotoneFn phi = weak_conductance_exact(c).phi;
      for (double eps : {0.1, 0.01}) {
        const int n0 = int(mixing_integral(phi, eps));
        const int n_max = 2 * n0 + 20;
        for (std::uint64_t m = 1; m + 1 < (1ull << c.size()); ++m) {
          const Eigen::VectorXd f = indicator(c.size(), m);
          const DecayCurve d = exact_decay(c, f, n_max);
          const double o2 = d.osc * d.osc;
          for (int n = n0; n <= n_max; ++n) {
            ++checks;
            if (d.values[std::size_t(n)] > eps * o2) ++violations;
          }
        }
      }
    }
    o.check(violations == 0, "decay above eps after the bound");
    o.note << violations << " violations in " << checks << " (chain, f, eps, n) checks";
  });

  criterion(3, "sandwich", 0, [&](Outcome& o) {
    std::size_t violations = 0, knots = 0;
    double worst = 0;
    for (const FiniteChain& c : chains) {
      const WeakConductance w = weak_conductance_exact(c);
      const MonotoneFn back = kstar_to_wcp(wcp_to_kstar(w.phi).constructive);
      for (double m : w.masses) {
        ++knots;
        const double r = back(m) / w.phi(m);
        worst = std::max(worst, r);
        if (r > 1 + 1e-9) ++violations;
      }
    }
    o.check(violations == 0, "round trip exceeds Phi");
    o.note << violations << " violations at " << knots << " knots, max ratio " << fmt_g(worst);
  });

  criterion(4, "counterexample-k8", 0, [](Outcome& o) {
    const FiniteChain fx = chain_from_json(read_json_file(std::string(SUBGEO_FIXTURES) + "/counterexample_k8.json"));
    const LevelChain lc = counterexample_chain(truncated_geometric(8, 0.5));
    o.check(fx.size() == lc.chain.size() && (fx.P - lc.chain.P).cwiseAbs().maxCoeff() == 0.0,
            "fixture differs from the generator");
    LevelChain from_fixture = lc;
    from_fixture.chain = fx;
    bool absorbing = true;
    double max_E = 0, min_norm = kInf;
    for (int k = 1; k < 8; ++k) {
      const ProductReducibility r = check_product_reducibility(from_fixture, k);
      absorbing = absorbing && r.diagonal_absorbing;
      max_E = std::max(max_E, std::abs(r.dirichlet));
      min_norm = std::min(min_norm, r.f_norm2);
    }
    o.check(absorbing, "(P*)^k P^k (i,i;i,i) != 1");
    o.check(max_E == 0.0 && min_norm > 0, "E((P*)^k P^k, f_k) != 0 or f_k = 0");
    double worst = 0;
    for (std::size_t s = 0; s < fx.size(); ++s)
      worst = std::max(worst, exact_decay(fx, indicator(fx.size(), 1ull << s), 200).values.back());
    o.check(worst < 1e-6, "P does not decay below 1e-6 by n = 200");
    o.note << "max |E| " << max_E << ", min ||f_k||^2 " << fmt_g(min_norm) << ", max decay at n=200 "
           << fmt_g(worst);
  });

  criterion(5, "l1-l2-discrepancy", 300.0, [](Outcome& o) {
    // The literal thresholds (slope -3, squared exponent in [2.7, 3.3]) are
    // the values of (a-b-1)/b for (a, b) = (5, 1); (4, 1) is checked against
    // the same formula, which gives 2.
    std::vector<int> grid;
    for (int n = 16; n <= 2048; n *= 2) {
      grid.push_back(n);
      if (n * 1.41421 < 2048) grid.push_back(int(n * 1.41421));
    }
    std::sort(grid.begin(), grid.end());
    for (double a : {5.0, 4.0}) {
      const double b = 1.0, p = (a - b - 1) / b;
      const JumpGrid g = jump_chain(a, b, 1e6, 1.02);
      const auto s = log_grid(10, 1e4, 31);
      const BetaLowerBound st = beta_lower_sticky(g.chain, s);
      const LineFit sf = loglog_fit(s, st.values);
      o.check(std::abs(sf.slope + p) <= 0.05, "sticky slope off");
      JumpDecayOptions jo;
      jo.nested.outer = 256;
      jo.nested.inner = 256;
      const DecayEstimate e = empirical_decay_jump(a, b, grid, jo);
      const double l2 = decay_exponent(e.points).slope, tv = decay_exponent(e.tv).slope;
      o.check(l2 >= 0.9 * p && l2 <= 1.1 * p, "squared-norm exponent off");
      o.check(tv >= 1.3 * l2 / 2, "TV exponent below 1.3x per-norm exponent");
      o.note << "(a,b)=(" << a << ",1): sticky slope " << fmt_g(sf.slope) << " (want " << -p << "), L2^2 exp "
             << fmt_g(l2) << " in [" << 0.9 * p << "," << 1.1 * p << "], TV exp " << fmt_g(tv) << " vs 1.3x "
             << fmt_g(l2 / 2) << "; ";
    }
  });

  criterion(6, "pseudo-marginal-bound", 0, [](Outcome& o) {
    Eigen::MatrixXd q(3, 3);
    q << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
    const FiniteChain prop = make_chain(q, uniform_law(3), {"a", "b", "c"}, true);
    Eigen::VectorXd varpi(3);
    varpi << 0.5, 1.0, 1.5;
    std::vector<double> vg;
    for (int k = 1; k <= 20; ++k) vg.push_back(0.5 * k / 20.0);
    std::size_t total = 0;
    auto run = [&](const std::vector<WeightLaw>& Q, const char* label) {
      const PmLift L = pm_lift(prop, varpi, Q);
      const PmBoundReport r = pm_conductance_bound(L, vg, L.chain.size());
      total += r.violations;
      o.note << label << ": " << r.violations << " violations; ";
    };
    run(std::vector<WeightLaw>(3, WeightLaw{{0.5, 1.5}, {0.5, 0.5}}), "two-point");
    for (double alpha : {1.5, 2.0, 3.0})
      run(std::vector<WeightLaw>(3, pareto_atoms(alpha, 8)), alpha == 1.5 ? "pareto 1.5" : alpha == 2 ? "pareto 2" : "pareto 3");
    o.check(total == 0, "exact conductance above the bound");
  });

  criterion(7, "duality", 0, [](Outcome& o) {
    std::mt19937_64 rng(777);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const FiniteChain c = random_reversible_chain(5, rng);
      for (int n : {1, 2, 5}) {
        const DualityReport r = duality_check(c, n);
        worst = std::max(worst, std::abs(r.lhs - r.rhs));
      }
    }
    o.check(worst <= 1e-9, "sides disagree");
    o.note << "max |lhs - rhs| " << fmt_g(worst);
  });

  criterion(8, "rwm-formulas", 0, [](Outcome& o) {
    auto make = [](Family f, int d, double tau, double eta) {
      TargetSpec t;
      t.family = f;
      t.d = d;
      t.tau = tau;
      t.eta = eta;
      return t;
    };
    std::vector<TargetSpec> ts;
    std::size_t rejected = 0;
    for (int d : {2, 10, 50}) {
      for (double tau : {1.0, 2.0, 5.0}) {
        const TargetSpec t = make(Family::student_t, d, tau, 1);
        try {
          iso_minorant(t);
          ts.push_back(t);
        } catch (const ValidationError&) {
          ++rejected;
        }
        ts.push_back(make(Family::subexp_product, d, tau, 0.5));
      }
      for (double eta : {1.0, 2.0, 5.0}) {
        ts.push_back(make(Family::product_student, d, 1, eta));
        ts.push_back(make(Family::cauchy_type, d, 1, eta));
      }
    }
    double worst = 0;
    std::size_t cases = 0;
    bool display_ok = true;
    for (const TargetSpec& t : ts)
      for (double eps : {1e-1, 1e-3})
        for (double u : {1.0, 10.0}) {
          const MixingReport r = rwm_mixing_time(t, 1.0, eps, u);
          ++cases;
          if (!r.closed_form) {
            worst = kInf;
            continue;
          }
          worst = std::max(worst, std::abs(*r.closed_form - r.bound) / r.bound);
          display_ok = display_ok && *r.display >= r.bound * (1 - 1e-9);
        }
    o.check(worst <= 0.05, "closed form and quadrature differ by more than 5%");
    o.check(display_ok, "simplified display below the bound");

    // Monotone in u and d, antitone in eps.
    bool mono = true;
    for (const TargetSpec& t : ts) {
      double prev = 0;
      for (double u : {1.0, 3.0, 10.0, 30.0}) {
        const double b = rwm_mixing_time(t, 1.0, 1e-3, u).bound;
        mono = mono && b >= prev;
        prev = b;
      }
      prev = kInf;
      for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double b = rwm_mixing_time(t, 1.0, eps, 1).bound;
        mono = mono && b <= prev;
        prev = b;
      }
    }
    o.check(mono, "monotonicity sweep");

    // Asymptotic orders, with L held fixed as in the stated orders: fit
    // (n - 1) / L against d, and n - 1 against u / eps at tiny eps.
    // From d = 5 on the student_t step-size constant no longer depends on d.
    const auto dgrid = log_grid(5, 1000, 12);
    auto fit_d = [&](Family f, double tau, double eta) {
      std::vector<double> x, y;
      for (double dd : dgrid) {
        const TargetSpec t = make(f, int(std::lround(dd)), tau, eta);
        const MixingReport r = rwm_mixing_time(t, 1.0, 1e-8, 1);
        x.push_back(t.d);
        y.push_back((r.bound - 1) / r.L);
      }
      return loglog_fit(x, y).slope;
    };
    auto fit_eps = [&](Family f, double tau, double eta) {
      std::vector<double> x, y;
      for (double eps : log_grid(1e-8, 1e-5, 7)) {
        const MixingReport r = rwm_mixing_time(make(f, 10, tau, eta), 1.0, eps, 1);
        x.push_back(1 / eps);
        y.push_back(r.bound - 1);
      }
      return loglog_fit(x, y).slope;
    };
    struct Order {
      const char* label;
      double fitted, expected;
    };
    std::vector<Order> orders{
        {"student_t d", fit_d(Family::student_t, 5, 1), 2.0},
        {"student_t eps", fit_eps(Family::student_t, 5, 1), 2.0 / 5},
    };
    for (double eta : {1.0, 2.0, 5.0}) {
      orders.push_back({"product_student d", fit_d(Family::product_student, 1, eta), 1 + 2 / eta});
      orders.push_back({"product_student eps", fit_eps(Family::product_student, 1, eta), 2 / eta});
      orders.push_back({"cauchy_type eps", fit_eps(Family::cauchy_type, 1, eta), 2 / eta});
    }
    // subexp: n - 1 ~ L d log(8 d u / eps)^{2/eta - 1}; fit the log power.
    {
      std::vector<double> x, y;
      for (double le = 30; le <= 60; le += 5) {
        const double eps = std::pow(10.0, -le);
        const MixingReport r = rwm_mixing_time(make(Family::subexp_product, 10, 1, 0.5), 1.0, eps, 1);
        x.push_back(std::log(8 * 10 / eps));
        y.push_back(r.bound - 1);
      }
      orders.push_back({"subexp log", loglog_fit(x, y).slope, 3.0});
    }
    double worst_order = 0;
    for (const auto& od : orders) {
      const double rel = std::abs(od.fitted - od.expected) / od.expected;
      worst_order = std::max(worst_order, rel);
      if (std::getenv("SUBGEO_VERBOSE")) std::printf("  %s: %.4f vs %.4f\n", od.label, od.fitted, od.expected);
      if (rel > 0.03) o.check(false, std::string(od.label) + " exponent " + fmt_g(od.fitted));
    }
    o.note << cases << " cases, max closed-vs-quadrature rel err " << fmt_g(worst) << ", " << rejected
           << " student_t combos rejected by the xi precondition, " << orders.size()
           << " fitted orders (max rel err " << fmt_g(worst_order) << ")";
  });

  criterion(9, "rwm-acceptance", 60.0, [](Outcome& o) {
    SimConfig c;
    c.kernel = KernelKind::rwm;
    c.target.family = Family::student_t;
    c.target.d = 2;
    c.target.tau = 5;
    c.varsigma = 1;
    c.n_steps = 100000;
    c.seed = 9;
    c.thin = 100000;
    const Ensemble e = run_rwm(c);
    std::vector<double> acc(e.replicas[0].accepted.begin(), e.replicas[0].accepted.end());
    const AsvarEstimate av = batch_means_asvar(acc);
    const double mean = e.acceptance(), se = std::sqrt(av.value / double(acc.size()));
    const double lb = 0.5 * std::exp(-0.5);
    o.check(mean >= lb - 3 * se, "acceptance below the coupling bound");
    o.note << "acceptance " << fmt_g(mean) << " (SE " << fmt_g(se) << ") vs bound " << fmt_g(lb);
  });

  criterion(10, "sharpness", 0, [&](Outcome& o) {
    double worst = kInf;
    for (const FiniteChain& c : chains) worst = std::min(worst, sharpness_ratio(weak_conductance_exact(c).phi, 0.01));
    double worst_an = kInf;
    for (double cc : {0.01, 0.1, 0.5}) {
      worst_an = std::min(worst_an, sharpness_ratio(MonotoneFn::constant(cc, Direction::increasing), 1e-3));
      for (double tau : {1.0, 2.0, 5.0})
        worst_an = std::min(worst_an, sharpness_ratio(MonotoneFn::power(cc, 1 / tau), 1e-3));
    }
    o.check(worst >= 8 * (1 - 1e-9), "chain profile ratio below 8");
    o.check(worst_an >= 8 * (1 - 1e-9), "analytic profile ratio below 8");
    o.note << "min ratio: chains " << fmt_g(worst) << ", analytic " << fmt_g(worst_an);
  });

  std::printf("%d failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
