#include "spdeloc/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "spdeloc/error.hpp"
#include "spdeloc/quadrature.hpp"

namespace spdeloc {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> identity_coeff(int d) {
  std::vector<double> id(multi_indices(d, 2).size(), 0.0);
  id[0] = 1.0;
  return id;
}

// s with a = s·b, if any (b nonzero).
bool proportional(const std::vector<double>& a, const std::vector<double>& b, double& s) {
  size_t piv = b.size();
  for (size_t i = 0; i < b.size(); ++i)
    if (b[i] != 0.0) {
      piv = i;
      break;
    }
  if (piv == b.size()) return false;
  s = a[piv] / b[piv];
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - s * b[i]) > 1e-15 * (std::abs(a[i]) + std::abs(s * b[i]))) return false;
  return true;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

void ChannelMap::set_channels(const OperatorSpec& spec) {
  p_ = spec.p();
  coeff_.clear();
  coeff_.push_back(identity_coeff(spec.dimension));
  for (const auto& t : spec.terms) coeff_.push_back(t.coeff);
  coeff_.push_back(spec.base.coeff);
  source_.assign(coeff_.size(), -1);
  factor_.assign(coeff_.size(), 1.0);
  sources_.clear();
  for (size_t c = 0; c < coeff_.size(); ++c) {
    const bool zero = std::all_of(coeff_[c].begin(), coeff_[c].end(), [](double v) { return v == 0.0; });
    if (zero) {
      source_[c] = 0;
      factor_[c] = 0.0;
      continue;
    }
    for (int s : sources_) {
      double f = 0.0;
      if (proportional(coeff_[c], coeff_[s], f)) {
        source_[c] = s;
        factor_[c] = f;
        break;
      }
    }
    if (source_[c] < 0) {
      source_[c] = static_cast<int>(c);
      sources_.push_back(static_cast<int>(c));
    }
  }
}

void ChannelMap::apply(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out, int first) const {
  if (x.rows() != modes()) fail(ErrorKind::InvalidConfig, "coefficient block has the wrong number of modes");
  const int nc = p_ + 2;
  out.resize(nc);
  compute(x, out);
  // aliases read from sources, so fill them before any source below `first` is dropped
  for (int c = nc - 1; c >= first; --c) {
    if (source_[c] == c) continue;
    out[c] = factor_[c] * out[source_[c]];
  }
  for (int c = 0; c < first; ++c) out[c].resize(0, 0);
}

DenseChannelMap::DenseChannelMap(const ProjectionTensor& proj, const OperatorSpec& spec) {
  set_channels(spec);
  if (proj.p != p_) fail(ErrorKind::InvalidConfig, "projection and operator have different p");
  m_ = static_cast<int>(proj.g[0].rows());
  const Eigen::Index n = proj.g[0].cols();
  stack_.resize(static_cast<Eigen::Index>(sources_.size()) * m_, n);
  for (size_t s = 0; s < sources_.size(); ++s) stack_.middleRows(s * m_, m_) = proj.g[sources_[s]];
}

void DenseChannelMap::compute(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out) const {
  const Mat y = stack_ * x;
  for (size_t s = 0; s < sources_.size(); ++s) out[sources_[s]] = y.middleRows(s * m_, m_);
}

bool TensorChannelMap::eligible(const MeasurementDesign& design, const OperatorSpec& spec) {
  if (design.d != 2 || spec.dimension != 2) return false;
  const auto idx = multi_indices(2, 2);
  auto ok = [&](const std::vector<double>& c) {
    for (size_t a = 0; a < idx.size(); ++a) {
      const auto& al = idx[a].a;
      const bool multiplier = (al[0] == 0 && al[1] == 0) || (al[0] == 2 && al[1] == 0) || (al[0] == 0 && al[1] == 2);
      if (!multiplier && c[a] != 0.0) return false;
    }
    return true;
  };
  if (!ok(spec.base.coeff)) return false;
  for (const auto& t : spec.terms)
    if (!ok(t.coeff)) return false;
  return true;
}

TensorChannelMap::TensorChannelMap(const MeasurementDesign& design, const OperatorSpec& spec,
                                   const SineBasis& basis) {
  if (!eligible(design, spec)) fail(ErrorKind::Unsupported, "tensor channel map needs multiplier channels in d = 2");
  set_channels(spec);
  n_ = basis.per_axis();
  std::vector<double> xs, ys;
  for (const auto& l : design.locations) {
    xs.push_back(l[0]);
    ys.push_back(l[1]);
  }
  xs = sorted_unique(xs);
  ys = sorted_unique(ys);
  for (const auto& l : design.locations) {
    const int i = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), l[0]) - xs.begin());
    const int k = static_cast<int>(std::lower_bound(ys.begin(), ys.end(), l[1]) - ys.begin());
    cell_.emplace_back(i, k);
  }
  auto sines = [&](const std::vector<double>& pts) {
    Mat s(pts.size(), n_);
    for (size_t i = 0; i < pts.size(); ++i)
      for (int j = 0; j < n_; ++j) s(i, j) = std::sin((j + 1) * kPi * pts[i]);
    return s;
  };
  sa_ = sines(xs);
  sb_ = sines(ys);

  // C(j1, j2) by tensor Gauss-Legendre over the support of K_δ
  const double delta = design.delta;
  const double r = delta * design.kernel->support_radius();
  const QuadratureRule q = composite_gl(-r, r, 4, 40);
  const Eigen::Index nq = static_cast<Eigen::Index>(q.nodes.size());
  Mat kw(nq, nq);
  for (Eigen::Index a = 0; a < nq; ++a)
    for (Eigen::Index b = 0; b < nq; ++b) {
      const double u[2] = {q.nodes[a] / delta, q.nodes[b] / delta};
      kw(a, b) = q.weights[a] * q.weights[b] * design.kernel->value(u) / delta;
    }
  Mat tc(n_, nq);
  for (int j = 0; j < n_; ++j)
    for (Eigen::Index a = 0; a < nq; ++a) tc(j, a) = std::cos((j + 1) * kPi * q.nodes[a]);
  const Mat cmat = tc * kw * tc.transpose();

  const auto idx = multi_indices(2, 2);
  const int a0 = multi_index_position(2, MultiIndex{{0, 0, 0}});
  const int a20 = multi_index_position(2, MultiIndex{{2, 0, 0}});
  const int a02 = multi_index_position(2, MultiIndex{{0, 2, 0}});
  pos_.resize(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const auto& m = basis.mode(j);
    pos_[j] = (m[0] - 1) + n_ * (m[1] - 1);
  }
  weight_.assign(coeff_.size(), Vec());
  for (size_t c = 0; c < coeff_.size(); ++c) {
    Vec w(basis.size());
    for (int j = 0; j < basis.size(); ++j) {
      const auto& m = basis.mode(j);
      const double k1 = m[0] * kPi, k2 = m[1] * kPi;
      const double mult = coeff_[c][a0] - coeff_[c][a20] * k1 * k1 - coeff_[c][a02] * k2 * k2;
      w(j) = 2.0 * cmat(m[0] - 1, m[1] - 1) * mult;
    }
    weight_[c] = w;
  }
}

Vec TensorChannelMap::row(int c, int k) const {
  const auto [i, l] = cell_[k];
  Vec g(pos_.size());
  for (size_t j = 0; j < pos_.size(); ++j) {
    const int j1 = pos_[j] % n_, j2 = pos_[j] / n_;
    g(j) = weight_[c](j) * sa_(i, j1) * sb_(l, j2);
  }
  return g;
}

void TensorChannelMap::compute(const Eigen::Ref<const Mat>& x, std::vector<Mat>& out) const {
  const Eigen::Index B = x.cols();
  const int mx = static_cast<int>(sa_.rows());
  Mat t = Mat::Zero(n_, n_ * B);
  for (int c : sources_) {
    const Vec& w = weight_[c];
    for (Eigen::Index b = 0; b < B; ++b) {
      double* tb = t.data() + static_cast<size_t>(b) * n_ * n_;
      for (size_t j = 0; j < pos_.size(); ++j) tb[pos_[j]] = x(j, b) * w(j);
    }
    const Mat u = sa_ * t;  // mx × (n·B)
    Mat& o = out[c];
    o.resize(M(), B);
    Mat wgrid(mx, sb_.rows());
    for (Eigen::Index b = 0; b < B; ++b) {
      wgrid.noalias() = u.middleCols(b * n_, n_) * sb_.transpose();
      for (int k = 0; k < M(); ++k) o(k, b) = wgrid(cell_[k].first, cell_[k].second);
    }
  }
}

BlockAccumulator::BlockAccumulator(int p, int M, double dt) : p_(p), m_(M), dt_(dt) {
  st_.reset(p, true);
  st_.M = M;
  st_.dt = dt;
  corr_left_ = Vec::Zero(p);
}

void BlockAccumulator::add(const std::vector<Mat>& vals, const std::vector<Mat>& frames, int B) {
  const int p = p_;
  const Mat& x = vals[0];
  const Mat& a0 = vals[p + 1];
  auto snapshot = [&](Eigen::Index col) {
    Mat s(m_, p + 1);
    for (int i = 0; i < p; ++i) s.col(i) = vals[1 + i].col(col);
    s.col(p) = a0.col(col);
    return s;
  };
  if (!started_) {
    first_ = snapshot(0);
    started_ = true;
  }
  const auto dx = (x.middleCols(1, B) - x.leftCols(B)).array();
  for (int i = 0; i < p; ++i) {
    const auto zi = vals[1 + i].leftCols(B).array();
    st_.ito_pt(i) += (zi * dx).sum();
    corr_left_(i) += dt_ * (zi * a0.leftCols(B).array()).sum();
    st_.corr_exact(i) += (zi * frames[p + 1].leftCols(B).array()).sum();
    for (int j = 0; j < p; ++j) {
      const auto zj = vals[1 + j].leftCols(B).array();
      if (j >= i) st_.left(i, j) += dt_ * (zi * zj).sum();
      st_.cross(i, j) += (zi * frames[1 + j].leftCols(B).array()).sum();
    }
  }
  last_ = snapshot(B);
}

SufficientStatistics BlockAccumulator::finish(long steps) {
  const int p = p_;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j) st_.left(i, j) = st_.left(j, i);
  st_.steps = steps;
  if (!started_) return st_;
  const Mat zl = last_.leftCols(p), z0 = first_.leftCols(p);
  st_.info_pt = st_.left + 0.5 * dt_ * (zl.transpose() * zl - z0.transpose() * z0);
  st_.corr_pt = corr_left_ + 0.5 * dt_ * (zl.transpose() * last_.col(p) - z0.transpose() * first_.col(p));
  return st_;
}

McProblem::McProblem(const McSetup& setup) : setup_(setup) {
  const OperatorSpec& spec = setup_.spec;
  spec.validate();
  if (setup_.theta.size() != spec.p()) fail(ErrorKind::InvalidConfig, "θ has the wrong length");
  if (!setup_.kernel || setup_.kernel->dim() != spec.dimension)
    fail(ErrorKind::InvalidConfig, "kernel dimension does not match the operator");
  if (!(setup_.delta > 0.0) || !(setup_.T > 0.0)) fail(ErrorKind::InvalidConfig, "δ and T must be positive");
  const int d = spec.dimension;
  int n = setup_.modes;
  if (n <= 0) n = static_cast<int>(std::ceil(setup_.modes_per_inverse_delta / setup_.delta - 1e-9));
  setup_.modes = n;
  design_ = design_grid(d, setup_.kernel, setup_.delta, setup_.M, setup_.margin);
  system_ = galerkin_drift(spec, setup_.theta, n);

  double dt = setup_.dt > 0.0 ? setup_.dt : setup_.delta * setup_.delta / setup_.dt_divisor;
  steps_ = std::max(1, static_cast<int>(std::ceil(setup_.T / dt - 1e-9)));
  dt_ = setup_.T / steps_;

  EngineKind kind = setup_.engine;
  const bool tensor_ok = system_.diagonal && TensorChannelMap::eligible(design_, spec);
  if (kind == EngineKind::Auto) kind = (d == 2 && tensor_ok) ? EngineKind::Tensor : EngineKind::Dense;
  if (kind == EngineKind::Tensor && !tensor_ok)
    fail(ErrorKind::Unsupported, "tensor engine needs a diagonal drift and multiplier channels in d = 2");

  MeasurementDesign one = design_;
  one.locations.resize(1);
  tail_ = project_kernel(one, spec, system_.basis).tail_energy;
  if (kind == EngineKind::Tensor) {
    map_ = std::make_unique<TensorChannelMap>(design_, spec, system_.basis);
  } else {
    proj_ = std::make_shared<const ProjectionTensor>(project_kernel(design_, spec, system_.basis));
    tail_ = proj_->tail_energy;
    map_ = std::make_unique<DenseChannelMap>(*proj_, spec);
  }

  if (system_.diagonal) {
    diag_ = build_diagonal_stepper(system_.diag(), dt_, setup_.noise_scale);
    block_ = setup_.block > 0 ? setup_.block : (kind == EngineKind::Tensor ? 16 : 256);
    if (setup_.init == InitialMode::Stationary && (system_.diag().array() >= 0.0).any())
      fail(ErrorKind::NotDissipative, "diagonal drift has a nonnegative entry");
  } else {
    dense_ = build_stepper(system_, dt_, true, setup_.noise_scale);
    block_ = setup_.block > 0 ? setup_.block : 64;
    if (setup_.init == InitialMode::Stationary) init_factor_ = stationary_factor(system_);
  }
}

std::string McProblem::engine() const {
  return map_->name() + (system_.diagonal ? "/diagonal" : "/dense-drift");
}

std::string McProblem::metadata() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "engine=" << engine() << ";N=" << modes() << ";dt=" << dt_ << ";steps=" << steps_
     << ";kernel_quadrature=GL40;sigma_fft=default";
  os << ";tail=";
  for (size_t c = 0; c < tail_.size(); ++c) os << (c ? "/" : "") << tail_[c];
  return os.str();
}

Vec McProblem::initial(const NormalStream& rng) const {
  const int n = modes();
  if (setup_.init == InitialMode::Zero) return Vec::Zero(n);
  Vec z(n);
  rng.fill(0, z.data(), n);
  if (system_.diagonal) return setup_.initial_scale * ((-0.5 / system_.diag().array()).sqrt() * z.array()).matrix();
  return setup_.initial_scale * (init_factor_ * z);
}

SufficientStatistics McProblem::run(uint64_t seed, uint64_t replicate) const {
  if (!system_.diagonal) {
    SufficientStatistics st;
    run_dense_batch(seed, replicate, 1, &st);
    return st;
  }
  const NormalStream rng(seed, replicate);
  const int n = modes();
  const int B = block_;
  Mat xh(n, B + 1), sh(n, B);
  xh.col(0) = initial(rng);
  Vec z(2 * n);
  BlockAccumulator acc(p(), M(), dt_);
  std::vector<Mat> vals, frames;
  const auto phi = diag_.phi.array(), psi = diag_.psi.array();
  const auto l11 = diag_.l11.array(), l21 = diag_.l21.array(), l22 = diag_.l22.array();
  for (int m0 = 0; m0 < steps_; m0 += B) {
    const int b = std::min(B, steps_ - m0);
    for (int s = 0; s < b; ++s) {
      rng.fill(static_cast<uint64_t>(m0 + s) + 1, z.data(), 2 * n);
      const auto z1 = z.head(n).array(), z2 = z.tail(n).array();
      const auto x = xh.col(s).array();
      sh.col(s) = psi * x + l21 * z1 + l22 * z2;
      xh.col(s + 1) = phi * x + l11 * z1;
    }
    map_->apply(xh.leftCols(b + 1), vals, 0);
    map_->apply(sh.leftCols(b), frames, 1);
    acc.add(vals, frames, b);
    xh.col(0) = xh.col(b);
  }
  return acc.finish(steps_);
}

void McProblem::run_dense_batch(uint64_t seed, uint64_t first, int count, SufficientStatistics* out) const {
  const int n = modes();
  const int B = block_;
  std::vector<NormalStream> rngs;
  for (int r = 0; r < count; ++r) rngs.emplace_back(seed, first + r);
  Mat x(n, count);
  for (int r = 0; r < count; ++r) x.col(r) = initial(rngs[r]);
  std::vector<Mat> xh(count, Mat(n, B + 1)), sh(count, Mat(n, B));
  for (int r = 0; r < count; ++r) xh[r].col(0) = x.col(r);
  std::vector<BlockAccumulator> acc(count, BlockAccumulator(p(), M(), dt_));
  Mat z(2 * n, count), noise(2 * n, count), s(n, count);
  std::vector<Mat> vals, frames;
  for (int m0 = 0; m0 < steps_; m0 += B) {
    const int b = std::min(B, steps_ - m0);
    for (int st = 0; st < b; ++st) {
      for (int r = 0; r < count; ++r) rngs[r].fill(static_cast<uint64_t>(m0 + st) + 1, z.col(r).data(), 2 * n);
      noise.noalias() = dense_.joint_factor.triangularView<Eigen::Lower>() * z;
      s.noalias() = dense_.psi * x;
      s += noise.bottomRows(n);
      x = dense_.phi * x + noise.topRows(n);
      for (int r = 0; r < count; ++r) {
        sh[r].col(st) = s.col(r);
        xh[r].col(st + 1) = x.col(r);
      }
    }
    for (int r = 0; r < count; ++r) {
      map_->apply(xh[r].leftCols(b + 1), vals, 0);
      map_->apply(sh[r].leftCols(b), frames, 1);
      acc[r].add(vals, frames, b);
      xh[r].col(0) = xh[r].col(b);
    }
  }
  for (int r = 0; r < count; ++r) out[r] = acc[r].finish(steps_);
}

void McProblem::run_many(uint64_t seed, uint64_t first, int count, std::vector<SufficientStatistics>& out,
                         int threads) const {
  out.assign(count, SufficientStatistics{});
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  if (system_.diagonal) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (int r = 0; r < count; ++r) out[r] = run(seed, first + r);
    return;
  }
  constexpr int kBatch = 16;
  const int batches = (count + kBatch - 1) / kBatch;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (int bi = 0; bi < batches; ++bi) {
    const int r0 = bi * kBatch;
    run_dense_batch(seed, first + r0, std::min(kBatch, count - r0), out.data() + r0);
  }
}

CoefficientTrajectory McProblem::trajectory(uint64_t seed, uint64_t replicate) const {
  const NormalStream rng(seed, replicate);
  const Vec x0 = initial(rng);
  if (system_.diagonal) return simulate_path(diag_, x0, steps_, rng, true);
  return simulate_path(dense_, x0, steps_, rng);
}

MeasurementPath McProblem::path(uint64_t seed, uint64_t replicate) const {
  const CoefficientTrajectory tr = trajectory(seed, replicate);
  if (proj_) return extract_measurements(tr, *proj_, kernel_norm());
  MeasurementPath mp;
  mp.times = tr.times;
  mp.noise_scale = kernel_norm();
  std::vector<Mat> v, f;
  map_->apply(Mat(tr.x.transpose()), v, 0);
  map_->apply(Mat(tr.frame.transpose()), f, 1);
  mp.X = v[0];
  for (int i = 0; i < p(); ++i) {
    mp.XA.push_back(v[1 + i]);
    mp.SA.push_back(f[1 + i]);
  }
  mp.XA0 = v[p() + 1];
  mp.SA0 = f[p() + 1];
  return mp;
}

SufficientStatistics McProblem::reference(uint64_t seed, uint64_t replicate) const {
  return accumulate(path(seed, replicate));
}

EstimateReport McProblem::estimate_replicate(const SufficientStatistics& st, Scheme scheme) const {
  EstimatorOptions opt;
  opt.scheme = scheme;
  opt.throw_on_singular = false;
  EstimateReport r = estimate(st, opt);
  r.kernel_norm = kernel_norm();
  r.delta = setup_.delta;
  r.M = M();
  r.N = modes();
  r.rho = rate_matrix(setup_.delta, M(), setup_.spec.orders());
  r.quadrature = metadata();
  return r;
}

}  // namespace spdeloc
