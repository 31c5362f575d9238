#include "spdeloc/sigma.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "spdeloc/error.hpp"
#include "spdeloc/quadrature.hpp"

namespace spdeloc {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// |K̂|² on the r2c half lattice ξ = 2πk/L, L = 4·padding.
struct PowerSpectrum {
  int d = 1;
  int samples = 0;
  int padding = 0;
  long len = 0;   // points per axis after padding
  long last = 0;  // len/2 + 1
  double period = 0.0;
  std::vector<double> g;
};

FourierOptions resolve(int d, FourierOptions opt) {
  static const int def_samples[4] = {0, 4096, 512, 64};
  if (opt.samples <= 0) opt.samples = def_samples[d];
  if (opt.padding <= 0) opt.padding = 4;
  if (opt.padding % 2 != 0) fail(ErrorKind::InvalidConfig, "zero-padding factor must be even");
  if (opt.samples < 8 || opt.samples % 2 != 0) fail(ErrorKind::InvalidConfig, "sample count must be even and ≥ 8");
  return opt;
}

PowerSpectrum power_spectrum(const Kernel& k, const FourierOptions& o) {
  PowerSpectrum ps;
  ps.d = k.dim();
  ps.samples = o.samples;
  ps.padding = o.padding;
  ps.len = static_cast<long>(o.samples) * o.padding;
  ps.last = ps.len / 2 + 1;
  ps.period = 4.0 * o.padding;
  const int d = ps.d;
  const double dx = 4.0 / o.samples;
  long real_size = 1, cplx_size = ps.last;
  for (int a = 0; a < d; ++a) real_size *= ps.len;
  for (int a = 0; a + 1 < d; ++a) cplx_size *= ps.len;

  double* in = fftw_alloc_real(real_size);
  fftw_complex* out = fftw_alloc_complex(cplx_size);
  if (!in || !out) fail(ErrorKind::InvalidConfig, "FFT buffer allocation failed");
  std::fill(in, in + real_size, 0.0);
  const long n = o.samples;
  long count = 1;
  for (int a = 0; a < d; ++a) count *= n;
  for (long idx = 0; idx < count; ++idx) {
    long rem = idx, flat = 0;
    double x[3] = {0, 0, 0};
    long stride = 1;
    for (int a = d - 1; a >= 0; --a) {
      const long i = rem % n;
      rem /= n;
      x[a] = -2.0 + i * dx;
      flat += i * stride;
      stride *= ps.len;
    }
    in[flat] = k.value(x);
  }
  int dims[3];
  for (int a = 0; a < d; ++a) dims[a] = static_cast<int>(ps.len);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c(d, dims, in, out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  const double scale = std::pow(dx, 2 * d);
  ps.g.resize(cplx_size);
  for (long i = 0; i < cplx_size; ++i) ps.g[i] = scale * (out[i][0] * out[i][0] + out[i][1] * out[i][1]);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return ps;
}

// f(ξ, g, multiplicity, on_coarse, at_origin) over the full lattice, using evenness of the summands.
template <class F>
void for_each_frequency(const PowerSpectrum& ps, F&& f) {
  const int d = ps.d;
  const long total = static_cast<long>(ps.g.size());
  const double h = 2.0 * kPi / ps.period;
  const long half = ps.len / 2;
  for (long i = 0; i < total; ++i) {
    long rem = i;
    const long kl = rem % ps.last;
    rem /= ps.last;
    double xi[3] = {0, 0, 0};
    bool coarse = (kl % 2 == 0);
    bool origin = (kl == 0);
    xi[d - 1] = h * kl;
    for (int a = d - 2; a >= 0; --a) {
      long ka = rem % ps.len;
      rem /= ps.len;
      if (ka > half) ka -= ps.len;
      xi[a] = h * ka;
      coarse = coarse && (ka % 2 == 0);
      origin = origin && (ka == 0);
    }
    const double mult = (kl == 0 || kl == half) ? 1.0 : 2.0;
    f(xi, ps.g[i], mult, coarse, origin);
  }
}

// ∫_{S^{d-1}} f.
template <class F>
double sphere_integral(int d, F&& f) {
  if (d == 1) {
    const double p[1] = {1.0}, m[1] = {-1.0};
    return f(p) + f(m);
  }
  if (d == 2) {
    const int n = 512;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ph = 2.0 * kPi * i / n;
      const double w[2] = {std::cos(ph), std::sin(ph)};
      s += f(w);
    }
    return s * 2.0 * kPi / n;
  }
  const QuadratureRule& gl = gauss_legendre(64);
  const int nphi = 128;
  double s = 0.0;
  for (size_t a = 0; a < gl.nodes.size(); ++a) {
    const double ct = gl.nodes[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    double ring = 0.0;
    for (int b = 0; b < nphi; ++b) {
      const double ph = 2.0 * kPi * b / nphi;
      const double w[3] = {st * std::cos(ph), st * std::sin(ph), ct};
      ring += f(w);
    }
    s += gl.weights[a] * ring * 2.0 * kPi / nphi;
  }
  return s;
}

// ∫ w g dξ/(2π)^d for homogeneous weights w against g = |K̂|².
struct LatticeIntegrator {
  const Kernel& k;
  const PowerSpectrum& ps;
  double g0;
  double lead;  // g ≈ lead·|ξ|^{2v} near the origin
  int v;

  LatticeIntegrator(const Kernel& kernel, const PowerSpectrum& spectrum)
      : k(kernel), ps(spectrum), g0(spectrum.g[0]), v(kernel.fourier_vanishing_order()) {
    if (v == 0) {
      lead = g0;
    } else {
      const double m = Kernel::bump(k.dim(), k.shape_parameter(), k.amplitude()).integral();
      lead = m * m;
    }
  }

  void check(double gamma, const std::string& what) const {
    if (gamma + 2.0 * v + ps.d <= 1e-12) {
      std::ostringstream os;
      os << what << ": integrand ~|ξ|^" << gamma + 2 * v << " is not integrable at the origin in d=" << ps.d;
      fail(ErrorKind::Divergent, os.str());
    }
  }

  // W(ξ, out) fills nw weights; degrees[i] their homogeneity. Returns {value, error} per weight.
  template <class W>
  std::vector<std::pair<double, double>> integrate(int nw, const std::vector<double>& degrees, W&& weights) const {
    const int d = ps.d;
    std::vector<double> fine(nw, 0.0), coarse(nw, 0.0);
    std::vector<double> eff(nw), wbuf(nw);
    std::vector<char> subtract(nw);
    for (int i = 0; i < nw; ++i) {
      eff[i] = degrees[i] + 2.0 * v;
      subtract[i] = (eff[i] < 0.0 && v == 0);
    }
    for_each_frequency(ps, [&](const double* xi, double g, double mult, bool on_coarse, bool origin) {
      if (origin) return;
      weights(xi, wbuf.data());
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
      const double gauss = std::exp(-r2);
      for (int i = 0; i < nw; ++i) {
        const double gi = subtract[i] ? g - g0 * gauss : g;
        const double val = mult * wbuf[i] * gi;
        fine[i] += val;
        if (on_coarse) coarse[i] += val;
      }
    });
    const double inv_ld = std::pow(ps.period, -d);
    const double inv_lc = std::pow(ps.period / 2.0, -d);
    const double norm = std::pow(2.0 * kPi, -d);
    std::vector<std::pair<double, double>> res(nw);
    for (int i = 0; i < nw; ++i) {
      double f = fine[i] * inv_ld;
      double c = coarse[i] * inv_lc;
      if (std::abs(eff[i]) < 1e-12) {
        // bounded, direction-dependent limit at the origin: use its spherical mean
        const double area = sphere_area(d);
        const int idx = i;
        const double mean = sphere_integral(d, [&](const double* w) {
                              weights(w, wbuf.data());
                              return wbuf[idx];
                            }) / area;
        f += lead * mean * inv_ld;
        c += lead * mean * inv_lc;
      }
      double value = f, err = std::abs(f - c);
      if (eff[i] < 0.0) {
        const double q = d + eff[i] + (v == 0 ? 2.0 : 0.0);
        const double r = std::pow(2.0, q);
        value = (r * f - c) / (r - 1.0);
        err = std::abs(value - f);
      }
      if (subtract[i]) {
        const int idx = i;
        const double sph = sphere_integral(d, [&](const double* w) {
          weights(w, wbuf.data());
          return wbuf[idx];
        });
        value += g0 * 0.5 * std::tgamma(0.5 * (degrees[i] + d)) * sph * norm;
      }
      res[i] = {value, err};
    }
    return res;
  }
};

double monomial(const MultiIndex& a, const double* xi) {
  double r = 1.0;
  for (int ax = 0; ax < 3; ++ax)
    for (int e = 0; e < a.a[ax]; ++e) r *= xi[ax];
  return r;
}

}  // namespace

SigmaResult asymptotic_sigma_full(const Kernel& k, const OperatorSpec& spec, const Vec& theta, double T,
                                  const FourierOptions& opt_in) {
  spec.validate();
  const int d = spec.dimension;
  if (k.dim() != d) fail(ErrorKind::InvalidConfig, "kernel and operator dimensions differ");
  if (theta.size() != spec.p()) fail(ErrorKind::InvalidConfig, "θ has the wrong length");
  ellipticity_check(spec, theta);
  const int p = spec.p();
  const auto orders = spec.orders();
  const auto idx = multi_indices(d, 2);
  const auto comb = spec.combined(theta);

  // principal parts: q_i(ξ) = Σ_{|α| = n_i} a_α ξ^α, s(ξ) = Σ_{|α| = 2} ā_α ξ^α
  std::vector<std::vector<std::pair<MultiIndex, double>>> q(p);
  std::vector<std::pair<MultiIndex, double>> s;
  for (size_t m = 0; m < idx.size(); ++m) {
    for (int i = 0; i < p; ++i)
      if (idx[m].order() == orders[i] && spec.terms[i].coeff[m] != 0.0) q[i].push_back({idx[m], spec.terms[i].coeff[m]});
    if (idx[m].order() == 2 && comb[m] != 0.0) s.push_back({idx[m], comb[m]});
  }

  struct Pair {
    int i, j;
    double sign;
  };
  std::vector<Pair> pairs;
  std::vector<double> degrees;
  const FourierOptions opt = resolve(d, opt_in);
  SigmaResult res;
  res.sigma = Mat::Zero(p, p);
  res.error = Mat::Zero(p, p);
  res.samples = opt.samples;
  res.padding = opt.padding;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const int diff = orders[j] - orders[i];
      if (diff % 2 != 0) continue;  // Re(σ_i conj σ_j) is odd in ξ
      pairs.push_back({i, j, (diff / 2) % 2 == 0 ? 1.0 : -1.0});
      degrees.push_back(orders[i] + orders[j] - 2.0);
    }

  const PowerSpectrum ps = power_spectrum(k, opt);
  const LatticeIntegrator li(k, ps);
  for (size_t m = 0; m < pairs.size(); ++m) {
    std::ostringstream os;
    os << "Σ entry (" << pairs[m].i + 1 << "," << pairs[m].j + 1 << ")";
    li.check(degrees[m], os.str());
  }
  const int nw = static_cast<int>(pairs.size());
  auto weights = [&](const double* xi, double* out) {
    double sv = 0.0;
    for (const auto& [a, c] : s) sv += c * monomial(a, xi);
    double qv[16];
    for (int i = 0; i < p; ++i) {
      double t = 0.0;
      for (const auto& [a, c] : q[i]) t += c * monomial(a, xi);
      qv[i] = t;
    }
    for (int m = 0; m < nw; ++m) out[m] = qv[pairs[m].i] * qv[pairs[m].j] / sv;
  };
  if (p > 16) fail(ErrorKind::InvalidConfig, "at most 16 unknown coefficients");
  const auto vals = li.integrate(nw, degrees, weights);
  for (int m = 0; m < nw; ++m) {
    const auto [i, j, sign] = pairs[m];
    const double v = 0.5 * T * sign * vals[m].first;
    res.sigma(i, j) = res.sigma(j, i) = v;
    res.error(i, j) = res.error(j, i) = 0.5 * T * vals[m].second;
  }
  std::ostringstream os;
  os << "FFT |K^|^2, " << opt.samples << " samples/axis on [-2,2]^" << d << ", zero-padded x" << opt.padding
     << ", lattice trapezoid";
  res.quadrature = os.str();
  return res;
}

Mat asymptotic_sigma(const Kernel& k, const OperatorSpec& spec, const Vec& theta, double T,
                     const FourierOptions& opt) {
  return asymptotic_sigma_full(k, spec, theta, T, opt).sigma;
}

double fourier_norm_sq(const Kernel& k, double s, int axis, const FourierOptions& opt_in) {
  const int d = k.dim();
  if (axis >= d) fail(ErrorKind::InvalidConfig, "derivative axis out of range");
  const FourierOptions opt = resolve(d, opt_in);
  const double gamma = 4.0 * s + (axis >= 0 ? 2.0 : 0.0);
  const PowerSpectrum ps = power_spectrum(k, opt);
  const LatticeIntegrator li(k, ps);
  li.check(gamma, "Fourier norm");
  auto weights = [&](const double* xi, double* out) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
    double w = s == 0.0 ? 1.0 : std::pow(r2, 2.0 * s);
    if (axis >= 0) w *= xi[axis] * xi[axis];
    out[0] = w;
  };
  return li.integrate(1, {gamma}, weights)[0].first;
}

}  // namespace spdeloc
