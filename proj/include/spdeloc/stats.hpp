#pragma once

#include <functional>
#include <vector>

namespace spdeloc {

double normal_cdf(double x);
double normal_pdf(double x);
// Acklam's rational approximation followed by Halley refinement (|error| < 1e-13 on (1e-300, 1)).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
double chi2_cdf(double x, double k);
double chi2_pdf(double x, double k);
// Wilson-Hilferty start, safeguarded Newton on chi2_cdf.
double chi2_quantile(double p, double k);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n = 0;
};
// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
// P(sup|B| > λ) for the Brownian bridge.
double kolmogorov_survival(double lambda);

double mean(const std::vector<double>& x);
double sample_sd(const std::vector<double>& x);

// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spdeloc
