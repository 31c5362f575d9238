#include "spdeloc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "spdeloc/error.hpp"

namespace spdeloc {

using nlohmann::json;

namespace {

const std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::McRates, "mc-rates"},         {ExperimentKind::Fisher, "fisher-convergence"},
    {ExperimentKind::Clt, "clt-normality"},        {ExperimentKind::Coverage, "coverage"},
    {ExperimentKind::ReactionTest, "reaction-test"}, {ExperimentKind::D2Boundary, "d2-boundary"},
    {ExperimentKind::RkhsCertify, "rkhs-certify"}, {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::Estimate, "estimate"},
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

DifferentialOperator operator_from_coeffs(int d, const json& j, const std::string& name, int order) {
  DifferentialOperator op;
  op.name = get_or<std::string>(j, "name", name);
  op.coeff.assign(multi_indices(d, 2).size(), 0.0);
  if (j.contains("coeffs"))
    for (const auto& [key, value] : j.at("coeffs").items()) {
      const int pos = multi_index_position(d, parse_multi_index(d, key));
      if (pos < 0) fail(ErrorKind::InvalidConfig, "multi-index " + key + " is not representable");
      op.coeff[pos] = value.get<double>();
    }
  op.order = get_or<int>(j, "order", order >= -1 ? order : op.computed_order(d));
  return op;
}

json coeffs_to_json(int d, const DifferentialOperator& op) {
  json c = json::object();
  const auto idx = multi_indices(d, 2);
  for (size_t k = 0; k < idx.size(); ++k)
    if (op.coeff[k] != 0.0) c[format_multi_index(d, idx[k])] = op.coeff[k];
  return c;
}

Vec vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> vec_to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (s == name) return kind;
  if (s == "fisher") return ExperimentKind::Fisher;
  if (s == "clt") return ExperimentKind::Clt;
  fail(ErrorKind::InvalidConfig, "unknown experiment kind '" + s + "'");
}

int MRule::operator()(double delta, int d) const {
  switch (kind) {
    case Kind::Fixed:
      return fixed;
    case Kind::InverseDelta:
      return static_cast<int>(std::ceil(c / delta - 1e-9));
    case Kind::InverseDeltaD:
      return static_cast<int>(std::ceil(c * std::pow(delta, -d) - 1e-9));
  }
  return fixed;
}

std::string MRule::describe() const {
  std::ostringstream os;
  if (kind == Kind::Fixed) os << "fixed(" << fixed << ")";
  else if (kind == Kind::InverseDelta) os << "ceil(" << c << "/delta)";
  else os << "ceil(" << c << "/delta^d)";
  return os.str();
}

std::shared_ptr<const Kernel> KernelChoice::make(int d) const {
  if (family == "bump") return std::make_shared<const Kernel>(Kernel::bump(d, a, amplitude));
  if (family == "laplacian_bump") return std::make_shared<const Kernel>(Kernel::laplacian_bump(d, a, amplitude));
  fail(ErrorKind::InvalidConfig, "unknown kernel family '" + family + "'");
}

OperatorSpec operator_from_json(const json& j) {
  const int d = get_or<int>(j, "dimension", 1);
  if (j.contains("example")) {
    const auto ex = j.at("example").get<std::string>();
    Vec b = j.contains("b") ? vec_from_json(j.at("b")) : Vec::Unit(d, 0);
    if (b.size() != d) fail(ErrorKind::InvalidConfig, "transport direction b must have d entries");
    if (ex == "transport") return OperatorSpec::transport_example(d, get_or<double>(j, "c", 0.0), b);
    if (ex == "reaction") return OperatorSpec::reaction_example(d, b);
    if (ex == "pure_reaction") return OperatorSpec::pure_reaction(d);
    if (ex == "heat") return OperatorSpec::heat(d);
    fail(ErrorKind::InvalidConfig, "unknown operator example '" + ex + "'");
  }
  OperatorSpec s;
  s.dimension = d;
  const auto& terms = j.at("terms");
  std::vector<int> orders = j.contains("orders") ? j.at("orders").get<std::vector<int>>() : std::vector<int>{};
  if (!orders.empty() && orders.size() != terms.size())
    fail(ErrorKind::InvalidConfig, "orders and terms have different lengths");
  for (size_t i = 0; i < terms.size(); ++i)
    s.terms.push_back(operator_from_coeffs(d, terms[i], "A" + std::to_string(i + 1), orders.empty() ? -2 : orders[i]));
  s.base = j.contains("base") ? operator_from_coeffs(d, j.at("base"), "base", -2) : operator_from_coeffs(d, json::object(), "base", -1);
  if (j.contains("p") && j.at("p").get<int>() != s.p()) fail(ErrorKind::InvalidConfig, "p does not match the number of terms");
  s.validate();
  return s;
}

json operator_to_json(const OperatorSpec& spec) {
  json j;
  j["dimension"] = spec.dimension;
  j["p"] = spec.p();
  j["orders"] = spec.orders();
  json terms = json::array();
  for (const auto& t : spec.terms) terms.push_back({{"name", t.name}, {"order", t.order}, {"coeffs", coeffs_to_json(spec.dimension, t)}});
  j["terms"] = terms;
  j["base"] = {{"name", spec.base.name}, {"coeffs", coeffs_to_json(spec.dimension, spec.base)}};
  return j;
}

McSetup ExperimentConfig::setup(double delta) const {
  McSetup s;
  s.spec = spec;
  s.theta = theta;
  s.kernel = kernel.make(spec.dimension);
  s.delta = delta;
  s.M = m_rule(delta, spec.dimension);
  s.margin = margin;
  s.modes = modes;
  s.modes_per_inverse_delta = modes_per_inverse_delta;
  s.T = T;
  s.dt = dt;
  s.dt_divisor = dt_divisor;
  s.init = init;
  s.noise_scale = noise_scale;
  return s;
}

void ExperimentConfig::validate() const {
  spec.validate();
  if (theta.size() != spec.p()) fail(ErrorKind::InvalidConfig, "theta must have p entries");
  if (replicates < 1) fail(ErrorKind::InvalidConfig, "replicates must be at least 1");
  if (!(T > 0.0)) fail(ErrorKind::InvalidConfig, "T must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidConfig, "alpha must lie in (0, 1)");
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) fail(ErrorKind::InvalidConfig, "deltas must be positive");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) fail(ErrorKind::InvalidConfig, "deltas must be strictly decreasing");
  }
  const auto k = kernel.make(spec.dimension);
  for (double d : deltas) {
    const int M = m_rule(d, spec.dimension);
    const int cap = design_capacity(spec.dimension, d, margin, k->support_radius());
    if (M < 1 || M > cap) {
      std::ostringstream os;
      os << "M rule " << m_rule.describe() << " gives M=" << M << " at delta=" << d << " (capacity " << cap << ")";
      fail(ErrorKind::Infeasible, os.str());
    }
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = to_string(kind);
  j["operator"] = operator_to_json(spec);
  j["theta"] = vec_to_std(theta);
  j["kernel"] = {{"family", kernel.family}, {"a", kernel.a}, {"amplitude", kernel.amplitude}};
  j["deltas"] = deltas;
  json m;
  if (m_rule.kind == MRule::Kind::Fixed) m = {{"kind", "fixed"}, {"M", m_rule.fixed}};
  else m = {{"kind", m_rule.kind == MRule::Kind::InverseDelta ? "inverse_delta" : "inverse_delta_d"}, {"c", m_rule.c}};
  j["M_rule"] = m;
  j["T"] = T;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["output"] = output;
  j["margin"] = margin;
  j["modes"] = modes;
  j["modes_per_inverse_delta"] = modes_per_inverse_delta;
  j["dt"] = dt;
  j["dt_divisor"] = dt_divisor;
  j["initial"] = init == InitialMode::Zero ? "zero" : "stationary";
  j["noise_scale"] = noise_scale;
  j["scheme"] = to_string(scheme);
  j["alpha"] = alpha;
  j["kernel_cases"] = kernel_cases;
  j["perturbations"] = perturbations;
  j["certify"] = {{"points", certify_points}, {"dt", certify_dt}, {"M", certify_M}, {"delta", certify_delta},
                  {"truncation", truncation}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
  c.spec = operator_from_json(j.at("operator"));
  c.theta = j.contains("theta") ? vec_from_json(j.at("theta")) : Vec::Ones(c.spec.p());
  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    c.kernel.family = get_or<std::string>(k, "family", "bump");
    c.kernel.a = get_or<double>(k, "a", 5.0);
    c.kernel.amplitude = get_or<double>(k, "amplitude", 1.0);
  }
  c.deltas = get_or<std::vector<double>>(j, "deltas", {});
  if (j.contains("M_rule")) {
    const auto& m = j.at("M_rule");
    const auto kind = get_or<std::string>(m, "kind", "inverse_delta");
    if (kind == "fixed") {
      c.m_rule.kind = MRule::Kind::Fixed;
      c.m_rule.fixed = m.at("M").get<int>();
    } else if (kind == "inverse_delta") {
      c.m_rule.kind = MRule::Kind::InverseDelta;
      c.m_rule.c = get_or<double>(m, "c", 0.25);
    } else if (kind == "inverse_delta_d") {
      c.m_rule.kind = MRule::Kind::InverseDeltaD;
      c.m_rule.c = get_or<double>(m, "c", 0.2);
    } else {
      fail(ErrorKind::InvalidConfig, "unknown M rule '" + kind + "'");
    }
  }
  c.T = get_or<double>(j, "T", 1.0);
  c.replicates = get_or<int>(j, "replicates", 500);
  c.seed = get_or<uint64_t>(j, "seed", 1);
  c.output = get_or<std::string>(j, "output", "");
  c.margin = get_or<double>(j, "margin", 0.1);
  c.modes = get_or<int>(j, "modes", 0);
  c.modes_per_inverse_delta = get_or<double>(j, "modes_per_inverse_delta", 4.0);
  c.dt = get_or<double>(j, "dt", 0.0);
  c.dt_divisor = get_or<double>(j, "dt_divisor", 20.0);
  const auto init = get_or<std::string>(j, "initial", "zero");
  if (init == "zero") c.init = InitialMode::Zero;
  else if (init == "stationary") c.init = InitialMode::Stationary;
  else fail(ErrorKind::Unsupported, "initial condition '" + init + "' (only zero and stationary are implemented)");
  c.noise_scale = get_or<double>(j, "noise_scale", 1.0);
  const auto scheme = get_or<std::string>(j, "scheme", "exact_drift");
  if (scheme == "exact_drift") c.scheme = Scheme::ExactDrift;
  else if (scheme == "pointwise") c.scheme = Scheme::Pointwise;
  else fail(ErrorKind::InvalidConfig, "unknown scheme '" + scheme + "'");
  c.alpha = get_or<double>(j, "alpha", 0.05);
  c.threads = get_or<int>(j, "threads", 0);
  if (j.contains("kernel_cases")) c.kernel_cases = j.at("kernel_cases").get<std::vector<std::string>>();
  c.perturbations = get_or<std::vector<double>>(j, "perturbations", {});
  if (j.contains("certify")) {
    const auto& r = j.at("certify");
    c.certify_points = get_or<int>(r, "points", c.certify_points);
    c.certify_dt = get_or<double>(r, "dt", c.certify_dt);
    c.certify_M = get_or<int>(r, "M", c.certify_M);
    c.certify_delta = get_or<double>(r, "delta", c.certify_delta);
    c.truncation = get_or<int>(r, "truncation", c.truncation);
  }
  if (j.contains("domain") && j.at("domain").get<std::string>() != "unit_cube")
    fail(ErrorKind::Unsupported, "only the unit cube (0,1)^d is supported");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::InvalidConfig, "cannot open config " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidConfig, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace spdeloc
