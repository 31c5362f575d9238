#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdeloc/kernel.hpp"
#include "spdeloc/linalg.hpp"
#include "spdeloc/montecarlo.hpp"
#include "spdeloc/operator.hpp"

namespace spdeloc {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class ExperimentKind { McRates, Fisher, Clt, Coverage, ReactionTest, D2Boundary, RkhsCertify, Simulate, Estimate };
const char* to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

// M(δ): fixed, ⌈c δ^{-1}⌉ or ⌈c δ^{-d}⌉.
struct MRule {
  enum class Kind { Fixed, InverseDelta, InverseDeltaD } kind = Kind::InverseDelta;
  int fixed = 1;
  double c = 0.25;
  int operator()(double delta, int d) const;
  std::string describe() const;
};

struct KernelChoice {
  std::string family = "bump";  // bump | laplacian_bump
  double a = 5.0;
  double amplitude = 1.0;
  std::shared_ptr<const Kernel> make(int d) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::McRates;
  OperatorSpec spec;
  Vec theta;
  KernelChoice kernel;
  std::vector<double> deltas;
  MRule m_rule;
  double T = 1.0;
  int replicates = 500;
  uint64_t seed = 1;
  std::string output;

  double margin = 0.1;
  int modes = 0;
  double modes_per_inverse_delta = 4.0;
  double dt = 0.0;
  double dt_divisor = 20.0;
  InitialMode init = InitialMode::Zero;
  double noise_scale = 1.0;
  Scheme scheme = Scheme::ExactDrift;
  double alpha = 0.05;
  int threads = 0;

  // reaction-test: θ₃ under test; d2-boundary: cases to run
  std::vector<std::string> kernel_cases{"nonnegative", "zero_moment"};
  // rkhs-certify
  std::vector<double> perturbations;
  int certify_points = 8;     // time points per measurement
  double certify_dt = 0.05;
  int certify_M = 2;
  double certify_delta = 0.1;
  int truncation = 200;

  McSetup setup(double delta) const;
  void validate() const;  // throws InvalidConfig or Infeasible; config_from_json calls it
  nlohmann::json to_json() const;
};

OperatorSpec operator_from_json(const nlohmann::json& j);
nlohmann::json operator_to_json(const OperatorSpec& spec);

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace spdeloc
