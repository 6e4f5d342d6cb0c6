#pragma once

#include <span>

namespace threshlasso::stats {

double normal_cdf(double x);
double normal_pdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step; absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double prob);

/// Two-sided critical value z_{1 - alpha/2}.
double normal_critical(double alpha);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_sf(double x, double dof);

/// Kolmogorov-Smirnov statistic of `sample` against N(0, 1).
double ks_statistic_normal(std::span<const double> sample);

/// Asymptotic Kolmogorov distribution tail P(sqrt(n) D > t) with the
/// Stephens small-sample correction.
double ks_pvalue(double d, std::size_t n);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least-squares line through (normal quantile, sorted sample) pairs
/// using plotting positions (i - 0.5) / n.
LineFit qq_normal_fit(std::span<const double> sample);

}  // namespace threshlasso::stats
