#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spdeloc/config.hpp"
#include "spdeloc/inference.hpp"
#include "spdeloc/montecarlo.hpp"
#include "spdeloc/stats.hpp"

namespace spdeloc {

struct ReplicateRecord {
  bool flagged = false;
  std::string reason;
  Vec theta_hat;
  Vec theta_pointwise;
  Vec std_error;  // (ρIρ)^{1/2} ρ^{-1}(θ̂ - θ)
  Mat rir;        // ρ I ρ for the scheme's information
  Mat rir_pt;     // ρ I ρ, trapezoid ∫ X^A X^Aᵀ
  double membership = 0.0;
  bool covered = false;
  ReactionTest reaction;
};

struct CellResult {
  double delta = 0.0;
  int M = 0, N = 0;
  long steps = 0;
  double dt = 0.0, T = 0.0;
  double kernel_norm = 1.0;
  std::string engine;
  std::string metadata;
  Vec theta;
  Mat rho;
  std::vector<ReplicateRecord> records;
};

// Aggregates over the clean replicates among the first `count` (all when count ≤ 0).
struct CellAggregate {
  int reps = 0, clean = 0, flagged = 0;
  bool aggregate_ok = false;  // ≥ 95% clean
  Vec mean_theta, rmse, rescaled_rmse, rmse_pointwise;
  Mat mean_rir, mean_rir_pt;
  Vec std_error_sd;
  std::vector<KsResult> ks;  // standardized errors / ‖K‖ against N(0, 1)
  double coverage = 0.0;
  double reject_rate = 0.0, reject_one_sided_rate = 0.0, reject_info_rate = 0.0;
};

CellAggregate aggregate(const CellResult& cell, int count = 0);

using Progress = std::function<void(const std::string&)>;

struct RunContext {
  int threads = 0;
  Progress progress;
  int chunk = 0;  // replicates per progress report (0 → 16 · threads)
};

// Replicates r = 0..R-1 of one δ; replicate streams are (cell << 32) | r under cfg.seed.
CellResult run_cell(const ExperimentConfig& cfg, double delta, int cell, const RunContext& ctx = {});

// Relative Frobenius distance ‖A - B‖ / ‖B‖ and the off-diagonal share max|A_ij| / min A_ii.
double relative_frobenius(const Mat& a, const Mat& b);
double offdiagonal_ratio(const Mat& a);

// Σ_k Σ_j g_kj² / λ'_j / ‖K‖² from the identity channel (bounded domain, any d).
double negative_sobolev_total(const McProblem& problem);

struct SlopeFit {
  std::vector<double> slope;  // per coordinate, log RMSE vs log δ
};
SlopeFit fit_rate_slopes(const std::vector<CellResult>& cells);

// Certification sweep along one direction of θ.
struct CertifyRow {
  std::string ray;
  double size = 0.0;
  double s_value = 0.0;
  double hellinger = 0.0;
  bool certified = false;
  bool consistent = true;
  double truncation_bound = 0.0;
  int N = 0, dim = 0;
};
std::vector<CertifyRow> run_certify(const ExperimentConfig& cfg);

// CLI-level runners: write CSV files + manifest under `out` (directory) and return the main CSV path.
struct RunOutput {
  std::vector<std::string> files;
  bool ok = true;
  std::string summary;
};

RunOutput run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, const RunContext& ctx);

std::string csv_preamble(const std::string& schema);
std::string format_double(double v);

}  // namespace spdeloc
