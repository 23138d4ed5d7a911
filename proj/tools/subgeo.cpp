// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

// subgeo: command-line front end. Exit codes: 0 success, 2 validation
// failure (bad input, state caps, unmet preconditions), 3 numerical failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "subgeo/chain_library.hpp"
#include "subgeo/finite_chain.hpp"
#include "subgeo/heavytail.hpp"
#include "subgeo/samplers.hpp"
#include "subgeo/serialization.hpp"
#include "subgeo/weak_cheeger.hpp"
#include "subgeo/wpi.hpp"

namespace {

using namespace subgeo;
namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

Param param_from(const std::string& s) {
  if (s == "alpha") return Param::alpha;
  if (s == "beta") return Param::beta;
  if (s == "kstar") return Param::kstar;
  throw ValidationError("--to must be alpha, beta or kstar");
}

std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

// ---------------------------------------------------------------------------

struct ConvertArgs {
  std::string in, to, out;
};

// Writes the converted certificate and, when a decay profile exists, the
// gamma table next to it as <stem>.gamma.csv.
int run_convert(const ConvertArgs& a) {
  const WpiCertificate cert = certificate_from_json(read_json_file(a.in));
  const WpiCertificate out = convert_certificate(cert, param_from(a.to));
  write_json_atomic(a.out, to_json(out));
  try {
    const DecayProfile d = decay_profile(out);
    std::vector<double> n, g;
    for (double k : {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 1e4, 1e5, 1e6}) {
      n.push_back(k);
      g.push_back(d.gamma(k));
    }
    write_file_atomic(sibling(a.out, ".gamma.csv"), csv_table({"n", "gamma"}, {n, g}));
  } catch (const ValidationError&) {
    // No decay statement (e.g. beta bounded away from 0); the certificate alone is written.
  } catch (const NumericalError&) {
  }
  std::cout << to_json(out).dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ChainArgs {
  std::string in, report, f, out;
  int n = -1;
};

Eigen::VectorXd load_f(const ChainArgs& a, const FiniteChain& c) {
  if (a.f.empty()) return indicator(c.size(), 1);
  const json j = read_json_file(a.f);
  const auto v = detail::num_array(j.is_object() ? detail::field(j, "f") : j, "f");
  require(v.size() == c.size(), "--f must have one entry per state");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

int run_chain(const ChainArgs& a) {
  const FiniteChain c = chain_from_json(read_json_file(a.in));
  json rep{{"report", a.report}, {"states", c.size()}};
  std::vector<std::pair<std::string, std::string>> csvs;

  if (a.report == "conductance") {
    const WeakConductance w = weak_conductance_exact(c);
    rep["conductance"] = to_json(w);
    rep["mixing_bound"] = {{"eps_0.1", mixing_integral(w.phi, 0.1)}, {"eps_0.01", mixing_integral(w.phi, 0.01)}};
    rep["sharpness_ratio_0.01"] = sharpness_ratio(w.phi, 0.01);
    csvs.emplace_back("conductance.csv", csv_table({"mass", "phi"}, {w.masses, w.values}));
  } else if (a.report == "decay") {
    const int n = a.n >= 0 ? a.n : 100;
    const Eigen::VectorXd f = load_f(a, c);
    const DecayCurve dP = exact_decay(c, f, n);
    const DecayCurve dS = exact_decay(reversibilize(c), f, n);
    rep["n"] = n;
    rep["osc2"] = dP.osc * dP.osc;
    rep["P_final"] = dP.values.back();
    rep["S_final"] = dS.values.back();
    rep["P"] = dP.values;
    rep["S"] = dS.values;
    std::vector<double> idx(dP.values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = double(i);
    csvs.emplace_back("decay.csv", csv_table({"n", "P", "S"}, {idx, dP.values, dS.values}));
  } else if (a.report == "beta-lower") {
    const auto s = log_grid(1e-2, 1e4, 61);
    const BetaLowerBound b = beta_lower_indicator(c, s);
    rep["indicator"] = to_json(b);
    rep["sticky"] = to_json(beta_lower_sticky(c, s));
    std::vector<std::string> head{"s", "indicator"};
    std::vector<std::vector<double>> cols{s, b.values};
    if (c.size() == 2) {
      const MonotoneFn exact = beta_star_two_state(c);
      std::vector<double> e;
      for (double x : s) e.push_back(exact(x));
      rep["exact_two_state"] = to_json(exact);
      head.push_back("exact");
      cols.push_back(e);
    }
    csvs.emplace_back("beta_lower.csv", csv_table(head, cols));
  } else if (a.report == "rupi") {
    rep["P"] = to_json(rupi_check(c, int(c.size())));
    if (a.n >= 1) {
      const FiniteChain T = power_product(c, a.n);
      rep["k"] = a.n;
      rep["product"] = to_json(rupi_check(T, int(c.size())));
    }
  } else if (a.report == "duality") {
    const int n = a.n >= 1 ? a.n : 1;
    rep["n"] = n;
    rep["duality"] = to_json(duality_check(c, n));
  } else {
    throw ValidationError("--report must be conductance, decay, beta-lower, rupi or duality");
  }

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_json_atomic((fs::path(a.out) / "report.json").string(), rep);
    for (auto& [name, body] : csvs) write_file_atomic((fs::path(a.out) / name).string(), body);
  }
  std::cout << rep.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BoundArgs {
  std::string family = "student_t";
  int d = 10;
  double tau = 5, eta = 1, varsigma = 1, eps = 0.01, u = 1, c = 1;
};

int run_rwm_bound(const BoundArgs& a) {
  TargetSpec t;
  t.family = family_from_name(a.family);
  require(t.family != Family::custom, "--family custom is only available through the library");
  t.d = a.d;
  t.tau = a.tau;
  t.eta = a.eta;
  t.c = a.c;
  t.constant_resolved = a.c != 1.0;
  t.validate();
  const MixingReport r = rwm_mixing_time(t, a.varsigma, a.eps, a.u);
  json j = to_json(r);
  if (r.closed_form && r.bound > 0) j["closed_vs_quadrature"] = *r.closed_form / r.bound;
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SimArgs {
  std::string config, out;
};

double std_error_of_acceptance(const Ensemble& e) {
  if (e.replicas.size() >= 2) {
    std::vector<double> m;
    for (const auto& r : e.replicas) m.push_back(double(r.accepts) / double(std::max<std::size_t>(1, r.accepted.size())));
    const double mean = pairwise_sum(m) / double(m.size());
    double v = 0;
    for (double x : m) v += (x - mean) * (x - mean);
    return std::sqrt(v / double(m.size() - 1) / double(m.size()));
  }
  const auto& acc = e.replicas.front().accepted;
  std::vector<double> x(acc.begin(), acc.end());
  if (x.size() < 1000) return kInf;
  const AsvarEstimate s = batch_means_asvar(x);
  return std::sqrt(s.value / double(x.size()));
}

int run_simulate(const SimArgs& a) {
  const json cj = read_json_file(a.config);
  const SimConfig cfg = sim_config_from_json(cj);
  const Ensemble e = simulate(cfg);
  fs::create_directories(a.out);
  write_file_atomic((fs::path(a.out) / "trajectories.csv").string(), trajectory_csv(e));

  json s;
  s["config"] = to_json(cfg);
  s["acceptance"] = e.acceptance();
  s["acceptance_se"] = detail::num(std_error_of_acceptance(e));
  std::size_t streak = 0;
  for (const auto& r : e.replicas) streak = std::max(streak, r.longest_rejection_streak);
  s["longest_rejection_streak"] = streak;

  if (cfg.kernel == KernelKind::rwm || cfg.kernel == KernelKind::pm_rwm) {
    const double vs = cfg.sigma > 0 ? cfg.sigma * std::sqrt(smoothness_constant(cfg.target) * cfg.target.d)
                                    : cfg.varsigma;
    const double lb = 0.5 * std::exp(-0.5 * vs * vs);
    s["acceptance_lower_bound"] = lb;
    s["effective_varsigma"] = vs;
    if (cfg.kernel == KernelKind::rwm && cfg.init == InitKind::warm)
      s["acceptance_check"] = e.acceptance() >= lb - 3 * std_error_of_acceptance(e);
  }
  if (cfg.kernel == KernelKind::jump) {
    // Stationary marginal against mu(x) = k x^{-(k+1)}, k = a - b - 1.
    const double k = cfg.jump_a - cfg.jump_b - 1;
    std::vector<double> xs;
    for (const auto& r : e.replicas) xs.push_back(r.x.back());
    if (xs.size() >= 8) {
      const KsResult ks = ks_test(xs, [&](double lx) { return 1 - std::exp(-k * lx); });
      s["final_state_ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}};
    }
    JumpDecayOptions jo;
    const json nj = cj.value("nested", json::object());
    jo.nested.outer = nj.value("outer", std::size_t(64));
    jo.nested.inner = nj.value("inner", std::size_t(64));
    jo.nested.seed = cfg.seed;
    const int n_max = nj.value("n_max", 1024);
    std::vector<int> grid;
    for (double n = 16; n <= n_max * 1.0001; n *= std::sqrt(2.0)) grid.push_back(int(std::lround(n)));
    const DecayEstimate d = empirical_decay_jump(cfg.jump_a, cfg.jump_b, grid, jo);
    const LineFit l2 = decay_exponent(d.points), tv = decay_exponent(d.tv);
    json pts = json::array();
    for (const auto& p : d.points) pts.push_back(to_json(p));
    s["decay"] = {{"points", pts},
                  {"l2_squared_exponent", l2.slope},
                  {"l2_fit_r2", l2.r2},
                  {"tv_proxy_exponent", tv.slope},
                  {"predicted_l2_squared_exponent", k / cfg.jump_b},
                  {"predicted_tv_exponent", k / cfg.jump_b},
                  {"outer", d.outer},
                  {"inner", d.inner}};
    std::vector<double> n, v, lo, hi, t;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      n.push_back(d.points[i].n);
      v.push_back(d.points[i].value);
      lo.push_back(d.points[i].lo);
      hi.push_back(d.points[i].hi);
      t.push_back(d.tv[i].value);
    }
    write_file_atomic((fs::path(a.out) / "decay.csv").string(),
                      csv_table({"n", "l2_squared", "lo", "hi", "tv_proxy"}, {n, v, lo, hi, t}));
  }
  write_json_atomic((fs::path(a.out) / "summary.json").string(), s);
  std::cout << s.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subgeo: weak Poincare certificates, conductance bounds and samplers"};
  app.require_subcommand(1);

  ConvertArgs ca;
  auto* conv = app.add_subcommand("convert", "Convert a certificate between alpha, beta and kstar");
  conv->add_option("--in", ca.in, "input certificate JSON")->required();
  conv->add_option("--to", ca.to, "target parametrization")->required()->check(CLI::IsMember({"alpha", "beta", "kstar"}));
  conv->add_option("--out", ca.out, "output certificate JSON")->required();

  ChainArgs ch;
  auto* chain = app.add_subcommand("chain", "Analyse a finite chain");
  chain->add_option("--in", ch.in, "chain JSON")->required();
  chain->add_option("--report", ch.report, "conductance|decay|beta-lower|rupi|duality")->required();
  chain->add_option("--f", ch.f, "function JSON (array or {\"f\": [...]})");
  chain->add_option("--n", ch.n, "horizon (decay), power k (rupi) or n (duality)");
  chain->add_option("--out", ch.out, "directory for report.json and CSV curves");

  BoundArgs bd;
  auto* bound = app.add_subcommand("rwm-bound", "RWM mixing-time bound for a heavy-tailed target");
  bound->add_option("--family", bd.family, "student_t|product_student|subexp_product|cauchy_type");
  bound->add_option("--d", bd.d, "dimension");
  bound->add_option("--tau", bd.tau, "tail index tau");
  bound->add_option("--eta", bd.eta, "tail index eta");
  bound->add_option("--varsigma", bd.varsigma, "normalized step size");
  bound->add_option("--eps", bd.eps, "target accuracy eps_Mix");
  bound->add_option("--u", bd.u, "warmness u >= 1");
  bound->add_option("--c", bd.c, "minorant constant (default 1, unresolved)");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a seeded simulation from a JSON config");
  sim->add_option("--config", sa.config, "SimConfig JSON")->required();
  sim->add_option("--out", sa.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*conv) return run_convert(ca);
    if (*chain) return run_chain(ch);
    if (*bound) return run_rwm_bound(bd);
    if (*sim) return run_simulate(sa);
  } catch (const StateCapError& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: exact subset enumeration is exponential; use a smaller chain or the sampled variant\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid JSON content: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
