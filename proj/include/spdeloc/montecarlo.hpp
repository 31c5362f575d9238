#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spdeloc/design.hpp"
#include "spdeloc/estimator.hpp"
#include "spdeloc/galerkin.hpp"
#include "spdeloc/projection.hpp"
#include "spdeloc/stepper.hpp"

namespace spdeloc {

// Linear map from Galerkin coefficients to measurement channels
// (0 identity, 1..p the A_i, p+1 the base A_0; same order as ProjectionTensor).
// Channels proportional to an earlier one are evaluated once.
class ChannelMap {
 public:
  virtual ~ChannelMap() = default;
  int p() const { return p_; }
  virtual int M() const = 0;
  virtual int modes() const = 0;
  virtual std::string name() const = 0;
  // out[c] ← channel c applied to every column of x (modes × B), M × B each; channels below
  // `first` are left empty.
  void apply(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out, int first = 0) const;

 protected:
  void set_channels(const OperatorSpec& spec);
  // Source channels only, out indexed like apply.
  virtual void compute(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out) const = 0;

  int p_ = 0;
  std::vector<std::vector<double>> coeff_;  // per channel
  std::vector<int> source_;                 // channel → source channel (itself when distinct)
  std::vector<double> factor_;              // channel = factor · source
  std::vector<int> sources_;                // distinct channels in order
};

class DenseChannelMap : public ChannelMap {
 public:
  DenseChannelMap(const ProjectionTensor& proj, const OperatorSpec& spec);
  int M() const override { return m_; }
  int modes() const override { return static_cast<int>(stack_.cols()); }
  std::string name() const override { return "dense-projection"; }

 protected:
  void compute(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out) const override;

 private:
  int m_ = 0;
  Mat stack_;  // source channel rows stacked, (#sources · M) × N
};

// d = 2, tensor-grid design, kernel even in each coordinate and channels built from 1, ∂₁², ∂₂²
// only. Then g_c(k, j) = 2 sin(j₁πa_i) sin(j₂πb_l) C(j₁, j₂) m_c(j) with
// C(j₁, j₂) = ∫ K_δ(u) cos(j₁πu₁) cos(j₂πu₂) du, so a channel costs two small GEMMs.
class TensorChannelMap : public ChannelMap {
 public:
  TensorChannelMap(const MeasurementDesign& design, const OperatorSpec& spec, const SineBasis& basis);
  int M() const override { return static_cast<int>(cell_.size()); }
  int modes() const override { return static_cast<int>(pos_.size()); }
  std::string name() const override { return "tensor-grid"; }

  static bool eligible(const MeasurementDesign& design, const OperatorSpec& spec);
  // Row of channel c for measurement k (basis order), for checks against project_kernel.
  Vec row(int c, int k) const;

 protected:
  void compute(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out) const override;

 private:
  int n_ = 0;                // modes per axis
  Mat sa_, sb_;              // sin(jπa_i): mx × n, my × n
  std::vector<Vec> weight_;  // per channel: 2 C(j) m_c(j) in basis order
  std::vector<int> pos_;     // basis index → column-major tensor slot
  std::vector<std::pair<int, int>> cell_;  // measurement k → (i, l)
};

enum class EngineKind { Auto, Dense, Tensor };

struct McSetup {
  OperatorSpec spec;
  Vec theta;
  std::shared_ptr<const Kernel> kernel;
  double delta = 1.0 / 64;
  int M = 1;
  double margin = 0.1;
  int modes = 0;                    // per axis; 0 → ⌈modes_per_inverse_delta / δ⌉
  double modes_per_inverse_delta = 4.0;
  double T = 1.0;
  double dt = 0.0;                  // 0 → δ² / dt_divisor
  double dt_divisor = 20.0;
  InitialMode init = InitialMode::Zero;
  double noise_scale = 1.0;         // multiplies dW
  double initial_scale = 1.0;       // multiplies the stationary draw
  EngineKind engine = EngineKind::Auto;
  int block = 0;                    // time steps per channel evaluation; 0 → engine default
};

// Everything shared by the replicates of one Monte Carlo cell.
class McProblem {
 public:
  explicit McProblem(const McSetup& setup);

  const McSetup& setup() const { return setup_; }
  const GalerkinSystem& system() const { return system_; }
  const MeasurementDesign& design() const { return design_; }
  const ChannelMap& channels() const { return *map_; }
  int p() const { return setup_.spec.p(); }
  int M() const { return design_.M(); }
  int modes() const { return system_.size(); }
  int steps() const { return steps_; }
  double dt() const { return dt_; }
  double kernel_norm() const { return setup_.kernel->norm(); }
  // Worst projection tail energy per channel (relative), from the quadrature of the first location.
  const std::vector<double>& tail_energy() const { return tail_; }
  std::string engine() const;
  std::string metadata() const;  // discretization summary for output rows

  // Streaming replicate: O(N·block) memory regardless of the path length.
  SufficientStatistics run(uint64_t seed, uint64_t replicate) const;
  // Full trajectory → measurements → statistics (reference path, small problems only).
  SufficientStatistics reference(uint64_t seed, uint64_t replicate) const;
  MeasurementPath path(uint64_t seed, uint64_t replicate) const;
  CoefficientTrajectory trajectory(uint64_t seed, uint64_t replicate) const;

  // Fills per-replicate statistics for replicates first..first+count-1 (OpenMP over replicates,
  // dense drift batched over replicates).
  void run_many(uint64_t seed, uint64_t first, int count, std::vector<SufficientStatistics>& out,
                int threads = 0) const;

  EstimateReport estimate_replicate(const SufficientStatistics& st, Scheme scheme) const;

 private:
  Vec initial(const NormalStream& rng) const;
  void run_dense_batch(uint64_t seed, uint64_t first, int count, SufficientStatistics* out) const;

  McSetup setup_;
  MeasurementDesign design_;
  GalerkinSystem system_;
  std::unique_ptr<ChannelMap> map_;
  std::shared_ptr<const ProjectionTensor> proj_;  // null for the tensor engine
  DiagonalStepper diag_;
  Stepper dense_;
  Mat init_factor_;
  int steps_ = 0;
  double dt_ = 0.0;
  int block_ = 0;
  std::vector<double> tail_;
};

// Streaming accumulation of SufficientStatistics from channel blocks.
class BlockAccumulator {
 public:
  BlockAccumulator(int p, int M, double dt);
  // vals[c]: M × (B+1) at t_{m0..m0+B}; frames[c]: M × B step integrals (c ≥ 1).
  void add(const std::vector<Mat>& vals, const std::vector<Mat>& frames, int B);
  SufficientStatistics finish(long steps);

 private:
  int p_, m_;
  double dt_;
  SufficientStatistics st_;
  Vec corr_left_;
  Mat first_;  // channel values at t_0 (M × (p+1)), for trapezoid end corrections
  Mat last_;
  bool started_ = false;
};

}  // namespace spdeloc
