// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "subgeo/chain_library.hpp"
#include "subgeo/serialization.hpp"

namespace {

using namespace subgeo;

void expect_same_values(const MonotoneFn& a, const MonotoneFn& b) {
  for (double x : log_grid(1e-6, 1e6, 49)) {
    const double u = a(x), v = b(x);
    if (std::isinf(u)) {
      EXPECT_EQ(u, v);
    } else {
      EXPECT_NEAR(u, v, 1e-14 * std::max(1.0, std::abs(u))) << x;
    }
  }
}

TEST(Json, MonotoneFormsRoundTrip) {
  const std::vector<MonotoneFn> fns{
      MonotoneFn::power(2.0, -1.5),
      MonotoneFn::power(0.5, 2.0).capped(3.0),
      MonotoneFn(Exponential{1.0, 0.7}, Direction::decreasing),
      MonotoneFn(LogDecay{1.0, 2.0}, Direction::decreasing),
      MonotoneFn::grid({0.1, 1, 10}, {5, 2, 0.5}, Interp::loglog, Direction::decreasing),
      MonotoneFn::grid({0.1, 1, 10}, {5, 2, 0.5}, Interp::step_right, Direction::decreasing).truncated(20),
  };
  for (const auto& f : fns) {
    const json j = to_json(f);
    expect_same_values(f, monotone_from_json(json::parse(j.dump())));
  }
}

TEST(Json, InfinityAsString) {
  const MonotoneFn f = MonotoneFn::grid({1, 2}, {kInf, 1.0}, Interp::step_right, Direction::decreasing);
  const json j = to_json(f);
  EXPECT_EQ(j["knots"][0][1], "inf");
  EXPECT_EQ(monotone_from_json(j)(1.0), kInf);
}

TEST(Json, DecreasingCallableTabulatesAboveFunction) {
  const MonotoneFn f = MonotoneFn::callable([](double s) { return 1 / (1 + s); }, Direction::decreasing);
  const MonotoneFn g = monotone_from_json(to_json(f));
  for (double x : log_grid(1e-10, 1e10, 97)) EXPECT_GE(g(x), f(x) * (1 - 1e-15));
}

TEST(Json, CertificateRoundTrip) {
  const WpiCertificate c = make_certificate(Param::beta, MonotoneFn::power(1.0, -1.0));
  const WpiCertificate d = certificate_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(d.sieve, c.sieve);
  EXPECT_EQ(d.param, c.param);
  EXPECT_EQ(d.a_max, c.a_max);
  expect_same_values(c.monotone(), d.monotone());
  const WpiCertificate k = convert_certificate(c, Param::kstar);
  const WpiCertificate k2 = certificate_from_json(to_json(k));
  for (double v : {0.001, 0.1, 0.25}) EXPECT_NEAR(k2.rate()(v), k.rate()(v), 1e-14);
}

TEST(Json, ChainRoundTrip) {
  std::mt19937_64 rng(1);
  const FiniteChain c = random_reversible_chain(5, rng);
  const FiniteChain d = chain_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(d.P, c.P);
  EXPECT_EQ(d.mu, c.mu);
  EXPECT_EQ(d.reversible, c.reversible);
}

TEST(Json, SimConfigRoundTrip) {
  SimConfig c;
  c.kernel = KernelKind::pm_rwm;
  c.target.family = Family::cauchy_type;
  c.target.d = 3;
  c.target.eta = 2;
  c.weights.kind = WeightSpec::Kind::pareto;
  c.weights.alpha = 1.5;
  c.n_steps = 77;
  c.n_replicas = 3;
  c.seed = 42;
  c.init = InitKind::offset;
  c.offset = 5;
  c.thin = 7;
  const SimConfig d = sim_config_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(d), to_json(c));
  // Same config, same trajectories.
  EXPECT_EQ(simulate(c).replicas[2].x, simulate(d).replicas[2].x);
}

TEST(Json, MalformedInputs) {
  EXPECT_THROW(monotone_from_json(json{{"direction", "decreasing"}}), ValidationError);
  EXPECT_THROW(monotone_from_json(json{{"direction", "sideways"}, {"form", "power"}}), ValidationError);
  EXPECT_THROW(monotone_from_json(json{{"direction", "decreasing"}, {"form", "power"}, {"coef", "x"}, {"exponent", 1}}),
               ValidationError);
  json bad_chain{{"mu", {0.5, 0.5}}, {"P", {{0.5, 0.5}, {0.5, 0.6}}}};
  EXPECT_THROW(chain_from_json(bad_chain), ValidationError);
  EXPECT_THROW(sim_config_from_json(json{{"kernel", "gibbs"}}), ValidationError);
  EXPECT_THROW(target_from_json(json{{"family", "subexp_product"}, {"eta", 2}}), ValidationError);

  const auto dir = std::filesystem::temp_directory_path() / "subgeo_ser_test";
  std::filesystem::create_directories(dir);
  const std::string p = (dir / "bad.json").string();
  write_file_atomic(p, "{ not json");
  EXPECT_THROW(read_json_file(p), ValidationError);
  EXPECT_THROW(read_json_file((dir / "missing.json").string()), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(Csv, FullPrecisionCells) {
  const std::string t = csv_table({"a"}, {{0.1, kInf}});
  EXPECT_EQ(t, "a\n0.10000000000000001\ninf\n");
}

}  // namespace
