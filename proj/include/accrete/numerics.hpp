#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

namespace accrete {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  std::size_t max_intervals = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  std::size_t evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [lo, hi]. The interval
/// with the largest error estimate is bisected until the summed estimate drops
/// below max(abs_tol, rel_tol * |value|). `breakpoints` inside (lo, hi) seed
/// the initial partition, useful when the integrand has a known sharp peak.
/// Throws Error(Numerical) with the last estimate when max_intervals is hit.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts = {},
                           std::span<const double> breakpoints = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_se = 0.0;  // sqrt(SSR / (n - 2)); 0 when n <= 2
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 points with
/// distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z) noexcept;

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_upper_tail(double statistic, double dof);

/// Shortest representation that round-trips; used for every numeric output so
/// that reruns are byte-identical.
std::string format_double(double v);

}  // namespace accrete
