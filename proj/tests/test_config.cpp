#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "spdeloc/config.hpp"
#include "spdeloc/error.hpp"

using namespace spdeloc;
using nlohmann::json;

namespace {

json base() {
  return json::parse(R"({
    "experiment": "coverage",
    "operator": {"example": "transport", "dimension": 1, "c": 0.2, "b": [1.0]},
    "theta": [1.0, 0.5],
    "deltas": [0.0625, 0.03125],
    "M_rule": {"kind": "inverse_delta", "c": 0.25},
    "T": 0.5,
    "replicates": 10,
    "seed": 42
  })");
}

ErrorKind kind_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << j.dump();
  return ErrorKind::InvalidConfig;
}

std::string config_dir() {
  const char* env = std::getenv("SPDELOC_CONFIG_DIR");
  return env ? env : "configs";
}

}  // namespace

TEST(Config, ExperimentNames) {
  for (auto k : {ExperimentKind::McRates, ExperimentKind::Fisher, ExperimentKind::Clt, ExperimentKind::Coverage,
                 ExperimentKind::ReactionTest, ExperimentKind::D2Boundary, ExperimentKind::RkhsCertify,
                 ExperimentKind::Simulate, ExperimentKind::Estimate})
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  EXPECT_EQ(parse_experiment_kind("fisher"), ExperimentKind::Fisher);
  EXPECT_EQ(parse_experiment_kind("clt"), ExperimentKind::Clt);
  EXPECT_THROW(parse_experiment_kind("nope"), Error);
}

TEST(Config, MRules) {
  MRule r;
  r.kind = MRule::Kind::InverseDelta;
  r.c = 0.25;
  EXPECT_EQ(r(1.0 / 128, 1), 32);
  EXPECT_EQ(r(1.0 / 100, 1), 25);
  r.kind = MRule::Kind::InverseDeltaD;
  r.c = 0.125;
  EXPECT_EQ(r(1.0 / 16, 2), 32);
  r.kind = MRule::Kind::Fixed;
  r.fixed = 3;
  EXPECT_EQ(r(0.001, 1), 3);
  EXPECT_FALSE(r.describe().empty());
}

TEST(Config, ParseShorthand) {
  const ExperimentConfig c = config_from_json(base());
  EXPECT_EQ(c.kind, ExperimentKind::Coverage);
  EXPECT_EQ(c.spec.p(), 2);
  EXPECT_EQ(c.spec.orders(), (std::vector<int>{2, 1}));
  EXPECT_EQ(c.theta.size(), 2);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.replicates, 10);
  const McSetup s = c.setup(0.03125);
  EXPECT_EQ(s.M, 8);
  EXPECT_EQ(s.T, 0.5);
}

TEST(Config, FullOperatorForm) {
  json j = base();
  j["operator"] = json::parse(R"({"dimension": 1, "orders": [2, 0],
    "terms": [{"name": "diffusion", "order": 2, "coeffs": {"2": 1.0}},
              {"name": "reaction", "order": 0, "coeffs": {"0": 1.0}}],
    "base": {"name": "drift", "coeffs": {"1": 0.3}}})");
  const ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.spec.orders(), (std::vector<int>{2, 0}));
  EXPECT_NEAR(c.spec.base.at(1, MultiIndex{{1, 0, 0}}), 0.3, 1e-15);
  // operator_to_json round trip
  const OperatorSpec back = operator_from_json(operator_to_json(c.spec));
  EXPECT_EQ(back.p(), 2);
  EXPECT_EQ(back.terms[1].coeff, c.spec.terms[1].coeff);
  EXPECT_EQ(back.base.coeff, c.spec.base.coeff);
}

TEST(Config, JsonRoundTrip) {
  const ExperimentConfig c = config_from_json(base());
  const ExperimentConfig d = config_from_json(c.to_json());
  EXPECT_EQ(d.kind, c.kind);
  EXPECT_EQ(d.deltas, c.deltas);
  EXPECT_EQ(d.seed, c.seed);
  EXPECT_EQ((d.theta - c.theta).norm(), 0.0);
  EXPECT_EQ(d.to_json(), c.to_json());
}

TEST(Config, ValidationErrors) {
  json j = base();
  j["theta"] = {1.0};
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
  j = base();
  j["replicates"] = 0;
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
  j = base();
  j["T"] = -1.0;
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
  j = base();
  j["deltas"] = {0.03125, 0.0625};
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
  j = base();
  j["M_rule"] = {{"kind", "fixed"}, {"M", 100}};
  EXPECT_EQ(kind_of(j), ErrorKind::Infeasible);
  j = base();
  j["initial"] = "from_file";
  EXPECT_EQ(kind_of(j), ErrorKind::Unsupported);
  j = base();
  j["domain"] = "torus";
  EXPECT_EQ(kind_of(j), ErrorKind::Unsupported);
  j = base();
  j["experiment"] = "bogus";
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
  j = base();
  j["kernel"] = {{"family", "gauss"}};
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
  j = base();
  j["operator"]["b"] = {1.0, 0.0};
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidConfig);
}

TEST(Config, ShippedConfigsLoad) {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(config_dir())) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 9);
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}
