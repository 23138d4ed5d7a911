// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON and CSV formats. Infinite values are written as the strings "inf"
// and "-inf", since JSON has no literal for them.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "subgeo/errors.hpp"
#include "subgeo/finite_chain.hpp"
#include "subgeo/heavytail.hpp"
#include "subgeo/monotone_fn.hpp"
#include "subgeo/samplers.hpp"
#include "subgeo/wpi.hpp"

namespace subgeo {

using json = nlohmann::json;

namespace detail {

inline json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double as_num(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError(std::string("json: field '") + what + "' must be a number");
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("json: missing field '") + key + "'");
  return j.at(key);
}

inline double num_field(const json& j, const char* key) { return as_num(field(j, key), key); }

inline double num_or(const json& j, const char* key, double dflt) {
  return j.contains(key) ? as_num(j.at(key), key) : dflt;
}

template <class E, std::size_t N>
E enum_from(const std::string& s, const std::array<std::pair<E, const char*>, N>& table, const char* what) {
  for (auto& [e, name] : table)
    if (s == name) return e;
  throw ValidationError(std::string("json: unknown ") + what + " '" + s + "'");
}

template <class E, std::size_t N>
const char* enum_name(E e, const std::array<std::pair<E, const char*>, N>& table) {
  for (auto& [v, name] : table)
    if (v == e) return name;
  return "?";
}

inline constexpr std::array<std::pair<Interp, const char*>, 4> kInterp{
    {{Interp::loglog, "loglog"}, {Interp::linear, "linear"}, {Interp::step_right, "step_right"},
     {Interp::step_left, "step_left"}}};
inline constexpr std::array<std::pair<Tail, const char*>, 4> kTail{
    {{Tail::constant, "constant"}, {Tail::power, "power"}, {Tail::zero, "zero"}, {Tail::infinite, "infinite"}}};
inline constexpr std::array<std::pair<Direction, const char*>, 2> kDir{
    {{Direction::increasing, "increasing"}, {Direction::decreasing, "decreasing"}}};
inline constexpr std::array<std::pair<Sieve, const char*>, 3> kSieve{
    {{Sieve::osc2, "osc2"}, {Sieve::sup2, "sup2"}, {Sieve::custom, "custom"}}};
inline constexpr std::array<std::pair<Param, const char*>, 3> kParam{
    {{Param::alpha, "alpha"}, {Param::beta, "beta"}, {Param::kstar, "kstar"}}};
inline constexpr std::array<std::pair<KernelKind, const char*>, 4> kKernel{
    {{KernelKind::rwm, "rwm"}, {KernelKind::imh, "imh"}, {KernelKind::pm_rwm, "pm_rwm"}, {KernelKind::jump, "jump"}}};
inline constexpr std::array<std::pair<InitKind, const char*>, 3> kInit{
    {{InitKind::warm, "warm"}, {InitKind::point, "point"}, {InitKind::offset, "offset"}}};
inline constexpr std::array<std::pair<WeightSpec::Kind, const char*>, 3> kWeight{
    {{WeightSpec::Kind::degenerate, "degenerate"}, {WeightSpec::Kind::pareto, "pareto"},
     {WeightSpec::Kind::discrete, "discrete"}}};

inline std::vector<double> num_array(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string("json: '") + what + "' must be an array");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(as_num(e, what));
  return v;
}

inline json num_array_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MonotoneFn / RateFn.

// Callables have no finite description. A decreasing callable is written as
// the right-continuous staircase through its values on a log grid, which
// dominates the function and so remains a valid alpha or beta.
inline json to_json(const MonotoneFn& f) {
  using namespace detail;
  json j;
  j["direction"] = enum_name(f.direction(), kDir);
  std::visit(
      [&](const auto& form) {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          j["form"] = "power";
          j["coef"] = num(form.coef);
          j["exponent"] = num(form.exponent);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          j["form"] = "exponential";
          j["coef"] = num(form.coef);
          j["rate"] = num(form.rate);
        } else if constexpr (std::is_same_v<T, LogDecay>) {
          j["form"] = "log_decay";
          j["coef"] = num(form.coef);
          j["scale"] = num(form.scale);
        } else if constexpr (std::is_same_v<T, Grid>) {
          j["form"] = "grid";
          j["interp"] = enum_name(form.interp, kInterp);
          j["left"] = enum_name(form.left, kTail);
          j["right"] = enum_name(form.right, kTail);
          json k = json::array();
          for (std::size_t i = 0; i < form.x.size(); ++i) k.push_back({num(form.x[i]), num(form.y[i])});
          j["knots"] = k;
        } else {
          require(f.decreasing(), "to_json: increasing callables have no conservative tabulation");
          auto xs = log_grid(1e-12, 1e12, 481);
          std::vector<double> ys;
          for (double x : xs) ys.push_back(form.fn(x));
          j["form"] = "grid";
          j["interp"] = "step_right";
          j["left"] = "constant";
          j["right"] = ys.back() == 0 ? "zero" : "constant";
          json k = json::array();
          for (std::size_t i = 0; i < xs.size(); ++i) k.push_back({xs[i], num(ys[i])});
          j["knots"] = k;
        }
      },
      f.form());
  if (std::isfinite(f.cap())) j["cap"] = f.cap();
  if (std::isfinite(f.support_end())) j["support_end"] = f.support_end();
  return j;
}

inline MonotoneFn monotone_from_json(const json& j) {
  using namespace detail;
  const Direction dir = enum_from(field(j, "direction").get<std::string>(), kDir, "direction");
  const std::string form = field(j, "form").get<std::string>();
  MonotoneFn f = MonotoneFn::constant(0.0);
  if (form == "power") {
    f = MonotoneFn(PowerLaw{num_field(j, "coef"), num_field(j, "exponent")}, dir);
  } else if (form == "exponential") {
    f = MonotoneFn(Exponential{num_field(j, "coef"), num_field(j, "rate")}, dir);
  } else if (form == "log_decay") {
    f = MonotoneFn(LogDecay{num_field(j, "coef"), num_field(j, "scale")}, dir);
  } else if (form == "grid") {
    Grid g;
    g.interp = enum_from(field(j, "interp").get<std::string>(), kInterp, "interpolation");
    g.left = enum_from(j.value("left", std::string("constant")), kTail, "tail");
    g.right = enum_from(j.value("right", std::string("constant")), kTail, "tail");
    for (const auto& kn : field(j, "knots")) {
      if (!kn.is_array() || kn.size() != 2) throw ValidationError("json: knots must be [x, y] pairs");
      g.x.push_back(as_num(kn[0], "knot"));
      g.y.push_back(as_num(kn[1], "knot"));
    }
    f = MonotoneFn(std::move(g), dir);
  } else {
    throw ValidationError("json: unknown function form '" + form + "'");
  }
  if (j.contains("cap")) f = f.capped(as_num(j.at("cap"), "cap"));
  if (j.contains("support_end")) f = f.truncated(as_num(j.at("support_end"), "support_end"));
  return f;
}

inline json to_json(const RateFn& k) {
  require(k.fn().serializable(), "to_json: rate function has no finite description");
  json j = to_json(k.fn());
  j["a_max"] = k.a_max();
  return j;
}

inline RateFn rate_from_json(const json& j, double a_max) { return RateFn(monotone_from_json(j), a_max); }

// ---------------------------------------------------------------------------
// Certificates: {sieve, a_max, param, fn, subject}.

inline json to_json(const WpiCertificate& c) {
  using namespace detail;
  json j;
  j["sieve"] = enum_name(c.sieve, kSieve);
  j["a_max"] = c.a_max;
  j["param"] = enum_name(c.param, kParam);
  j["fn"] = c.param == Param::kstar ? to_json(c.rate()) : to_json(c.monotone());
  j["subject"] = c.subject;
  return j;
}

inline WpiCertificate certificate_from_json(const json& j) {
  using namespace detail;
  const Sieve sieve = enum_from(field(j, "sieve").get<std::string>(), kSieve, "sieve");
  const double a_max = j.contains("a_max") ? num_field(j, "a_max") : default_a_max(sieve);
  const Param param = enum_from(field(j, "param").get<std::string>(), kParam, "param");
  const std::string subject = j.value("subject", std::string("P"));
  require(a_max > 0 && std::isfinite(a_max), "certificate: a_max must be positive and finite");
  if (param == Param::kstar) {
    WpiCertificate c{sieve, a_max, param, rate_from_json(field(j, "fn"), a_max), subject};
    c.validate();
    return c;
  }
  MonotoneFn f = monotone_from_json(field(j, "fn"));
  if (param == Param::beta) f = f.capped(a_max);
  WpiCertificate c{sieve, a_max, param, f, subject};
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Chains: {states, mu, P, flags: {reversible, support_restricted}}.

inline json to_json(const FiniteChain& c) {
  json j;
  j["states"] = c.states;
  std::vector<double> mu(c.mu.data(), c.mu.data() + c.mu.size());
  j["mu"] = detail::num_array_json(mu);
  json P = json::array();
  for (Eigen::Index i = 0; i < c.P.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.P.cols(); ++k) row.push_back(c.P(i, k));
    P.push_back(row);
  }
  j["P"] = P;
  j["flags"] = {{"reversible", c.reversible}, {"support_restricted", c.support_restricted}};
  return j;
}

inline FiniteChain chain_from_json(const json& j) {
  using namespace detail;
  const auto mu_v = num_array(field(j, "mu"), "mu");
  const json& Pj = field(j, "P");
  require(Pj.is_array() && Pj.size() == mu_v.size(), "chain: P must have one row per state");
  const auto n = Eigen::Index(mu_v.size());
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = num_array(Pj[std::size_t(i)], "P");
    require(row.size() == mu_v.size(), "chain: P must be square");
    for (Eigen::Index k = 0; k < n; ++k) P(i, k) = row[std::size_t(k)];
  }
  Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mu_v.data(), n);
  std::vector<std::string> states;
  if (j.contains("states")) states = j.at("states").get<std::vector<std::string>>();
  bool rev = false, restricted = false;
  if (j.contains("flags")) {
    rev = j.at("flags").value("reversible", false);
    restricted = j.at("flags").value("support_restricted", false);
  }
  return make_chain(std::move(P), std::move(mu), std::move(states), rev, restricted);
}

// ---------------------------------------------------------------------------
// Targets and simulation configs.

inline json to_json(const TargetSpec& t) {
  json j{{"family", family_name(t.family)}, {"d", t.d},   {"tau", t.tau},
         {"eta", t.eta},                     {"c", t.c},   {"constant_resolved", t.constant_resolved},
         {"xi", t.xi},                       {"dimension_factor", t.dimension_factor}};
  return j;
}

inline TargetSpec target_from_json(const json& j) {
  TargetSpec t;
  t.family = family_from_name(detail::field(j, "family").get<std::string>());
  require(t.family != Family::custom, "json: the custom family needs a programmatic minorant");
  t.d = j.value("d", 2);
  t.tau = detail::num_or(j, "tau", t.tau);
  t.eta = detail::num_or(j, "eta", t.eta);
  t.c = detail::num_or(j, "c", 1.0);
  t.constant_resolved = j.value("constant_resolved", false);
  t.xi = detail::num_or(j, "xi", 0.0);
  t.dimension_factor = j.value("dimension_factor", true);
  t.validate();
  return t;
}

inline json to_json(const WeightSpec& w) {
  json j{{"kind", detail::enum_name(w.kind, detail::kWeight)}};
  if (w.kind == WeightSpec::Kind::pareto) j["alpha"] = w.alpha;
  if (w.kind == WeightSpec::Kind::discrete) {
    j["atoms"] = w.atoms;
    j["probs"] = w.probs;
  }
  return j;
}

inline WeightSpec weights_from_json(const json& j) {
  WeightSpec w;
  w.kind = detail::enum_from(j.value("kind", std::string("degenerate")), detail::kWeight, "weight law");
  w.alpha = detail::num_or(j, "alpha", w.alpha);
  if (j.contains("atoms")) w.atoms = detail::num_array(j.at("atoms"), "atoms");
  if (j.contains("probs")) w.probs = detail::num_array(j.at("probs"), "probs");
  w.validate();
  return w;
}

inline json to_json(const SimConfig& c) {
  json j;
  j["kernel"] = kernel_name(c.kernel);
  if (c.kernel == KernelKind::jump) {
    j["jump"] = {{"a", c.jump_a}, {"b", c.jump_b}};
  } else {
    j["target"] = to_json(c.target);
    j["sigma"] = c.sigma;
    j["varsigma"] = c.varsigma;
  }
  if (c.kernel == KernelKind::imh) j["imh_scale"] = c.imh_scale;
  if (c.kernel == KernelKind::pm_rwm) j["weights"] = to_json(c.weights);
  j["n_steps"] = c.n_steps;
  j["n_replicas"] = c.n_replicas;
  j["seed"] = c.seed;
  j["init"] = {{"kind", init_name(c.init)}, {"point", c.init_point}, {"offset", c.offset}};
  j["thin"] = c.thin;
  return j;
}

inline SimConfig sim_config_from_json(const json& j) {
  using namespace detail;
  SimConfig c;
  c.kernel = enum_from(field(j, "kernel").get<std::string>(), kKernel, "kernel");
  if (c.kernel == KernelKind::jump) {
    const json& jp = field(j, "jump");
    c.jump_a = num_field(jp, "a");
    c.jump_b = num_field(jp, "b");
  } else {
    c.target = target_from_json(field(j, "target"));
  }
  c.sigma = num_or(j, "sigma", 0.0);
  c.varsigma = num_or(j, "varsigma", 1.0);
  c.imh_scale = num_or(j, "imh_scale", 0.0);
  if (j.contains("weights")) c.weights = weights_from_json(j.at("weights"));
  c.n_steps = j.value("n_steps", std::size_t(1000));
  c.n_replicas = j.value("n_replicas", std::size_t(1));
  c.seed = j.value("seed", std::uint64_t(1));
  c.thin = j.value("thin", std::size_t(1));
  if (j.contains("init")) {
    const json& ji = j.at("init");
    c.init = enum_from(ji.value("kind", std::string("warm")), kInit, "initial law");
    if (ji.contains("point")) c.init_point = num_array(ji.at("point"), "point");
    c.offset = num_or(ji, "offset", 0.0);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Reports.

inline json to_json(const MixingReport& r) {
  using detail::num;
  json j{{"family", r.family},
         {"varsigma", r.varsigma},
         {"eps_mix", r.eps_mix},
         {"u", r.u},
         {"L", num(r.L)},
         {"sigma", num(r.sigma)},
         {"delta", num(r.delta)},
         {"epsilon", num(r.epsilon)},
         {"alpha0_lower", num(r.alpha0_lb)},
         {"c", r.c},
         {"constant_unresolved", r.constant_unresolved},
         {"lower", num(r.lower)},
         {"upper", num(r.upper)},
         {"prefactor", num(r.prefactor)},
         {"integral", num(r.integral)},
         {"bound", num(r.bound)},
         {"n_bound", r.n_bound},
         {"n_saturated", r.n_saturated}};
  j["closed_form"] = r.closed_form ? num(*r.closed_form) : json(nullptr);
  j["display"] = r.display ? num(*r.display) : json(nullptr);
  j["display_formula"] = r.display_formula;
  return j;
}

inline json to_json(const WeakConductance& w) {
  json j;
  j["masses"] = detail::num_array_json(w.masses);
  j["values"] = detail::num_array_json(w.values);
  j["minimizers"] = w.minimizers;
  j["certified"] = w.certified;
  j["phi"] = to_json(w.phi);
  return j;
}

inline json to_json(const BetaLowerBound& b) {
  return json{{"s", detail::num_array_json(b.s)},
              {"values", detail::num_array_json(b.values)},
              {"certified", b.certified},
              {"fn", to_json(b.fn)}};
}

inline json to_json(const RupiVerdict& v) {
  json j{{"is_rupi", v.is_rupi}};
  j["m"] = v.m ? json(*v.m) : json(nullptr);
  if (v.witness) {
    j["witness"] = {v.witness->first, v.witness->second};
    j["witness_label"] = v.witness_label;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline json to_json(const DualityReport& d) {
  return json{{"lhs", d.lhs}, {"rhs", d.rhs}, {"agree", d.agree}, {"max_tv_ratio", d.max_tv_ratio}, {"tv_ok", d.tv_ok}};
}

inline json to_json(const DecayPoint& p) {
  return json{{"n", p.n}, {"value", p.value}, {"lo", p.lo}, {"hi", p.hi}, {"se", p.se}};
}

// ---------------------------------------------------------------------------
// Files.

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

// Writes through a temporary file and renames it into place, so readers
// never see a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

inline void write_json_atomic(const std::string& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// Full round-trip precision for CSV cells.
inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  std::ostringstream os;
  for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << fmt(columns[k][r]);
    os << "\n";
  }
  return os.str();
}

inline std::string decay_csv(const DecayCurve& d) {
  std::vector<double> n(d.values.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = double(i);
  return csv_table({"n", "value"}, {n, d.values});
}

// Tidy trajectory CSV: replica, step, state columns, accepted. The accepted
// flag refers to the transition into the recorded row (0 for step 0).
inline std::string trajectory_csv(const Ensemble& e) {
  std::ostringstream os;
  os << "replica,step";
  for (int k = 0; k < e.dim; ++k) os << ",x" << k;
  const bool weights = !e.replicas.empty() && !e.replicas.front().weight.empty();
  if (weights) os << ",w";
  os << ",accepted\n";
  for (std::size_t r = 0; r < e.replicas.size(); ++r) {
    const auto& t = e.replicas[r];
    const std::size_t rows = t.x.size() / std::size_t(e.dim);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t step = i * e.thin;
      os << r << "," << step;
      for (int k = 0; k < e.dim; ++k) os << "," << fmt(t.x[i * std::size_t(e.dim) + std::size_t(k)]);
      if (weights) os << "," << fmt(t.weight[i]);
      os << "," << (step == 0 ? 0 : int(t.accepted[step - 1])) << "\n";
    }
  }
  return os.str();
}

}  // namespace subgeo
