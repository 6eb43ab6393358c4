#pragma once

// Aggregate edits-per-article distribution: lognormals of every age, weighted
// by how many articles were created at that age.

#include <cstddef>
#include <span>
#include <vector>

#include "accrete/numerics.hpp"

namespace accrete {

/// Density of n when log n ~ Normal(mu, sigma2).
double lognormal_pdf(double n, double mu, double sigma2);

struct MixtureSpec {
  double drift_a = 0.0;
  double noise_var_s2 = 0.0;
  double horizon_T = 1.0;  // oldest age, in steps
  double growth_g = 0.0;   // creation-rate growth per step
  double n0 = 1.0;
  // Youngest age included. Age zero is a point mass at n0 and has no density;
  // the weight is normalized over [age_floor, horizon_T]. age_floor equal to
  // horizon_T puts all weight on that single age.
  double age_floor = 1.0;
  QuadratureOptions quadrature{};

  void validate() const;
  /// Normalized weight of age t: proportional to exp(g * (T - t)).
  double weight(double age) const;
};

double mixture_pdf(double n, const MixtureSpec& spec);

struct AgeAtom {
  double age;
  double weight;
};

/// Mixture over a discrete set of ages; weights are normalized internally.
double mixture_pdf(double n, const MixtureSpec& spec, std::span<const AgeAtom> atoms);

struct TailFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of log density against log n on a geometric grid of
/// `points` values in [n_lo, n_hi]. Requires the density to be decreasing at
/// n_lo (n_lo beyond the mode).
TailFit tail_exponent(const MixtureSpec& spec, double n_lo, double n_hi, std::size_t points = 41);

/// Same fit for an arbitrary density; used for fixtures and by tail_exponent.
template <class Density>
TailFit tail_exponent_of(Density&& density, double n_lo, double n_hi, std::size_t points = 41);

struct TailStability {
  TailFit lower;  // [n_lo, 10 n_lo]
  TailFit upper;  // [10 n_lo, 100 n_lo]
  double slope_change = 0.0;
  bool power_law_stable = false;  // slope_change < threshold
};

TailStability tail_stability(const MixtureSpec& spec, double n_lo, double threshold = 0.1);

/// Hurwitz zeta sum_{k>=0} (k + q)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

struct FitComparison {
  double cutoff = 0.0;
  std::size_t tail_size = 0;
  double lognormal_mu = 0.0;
  double lognormal_sigma2 = 0.0;
  double powerlaw_alpha = 0.0;
  double lognormal_loglik = 0.0;  // on the tail, conditional on x >= cutoff
  double powerlaw_loglik = 0.0;
  double loglik_difference = 0.0;  // lognormal - power law
};

/// Contest on the integer tail x >= cutoff (default: the sample median).
/// The lognormal comes from the log-moments of the whole sample, discretized
/// to integers and truncated at the cutoff; the discrete power law
/// x^-alpha / zeta(alpha, cutoff) is fit by maximum likelihood on the tail.
FitComparison compare_fits(std::span<const double> sample, double cutoff = 0.0);

}  // namespace accrete

#include "accrete/detail/mixture_impl.hpp"
