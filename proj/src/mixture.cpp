#include "accrete/mixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "accrete/error.hpp"

namespace accrete {
namespace {

double log_lognormal_pdf(double n, double mu, double sigma2) {
  const double d = std::log(n) - mu;
  return -std::log(n) - 0.5 * std::log(2.0 * std::numbers::pi * sigma2) - d * d / (2.0 * sigma2);
}

double upper_normal(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

double lognormal_pdf(double n, double mu, double sigma2) {
  if (!(n > 0.0)) throw Error(ErrorKind::Domain, "lognormal_pdf: n must be > 0");
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::Domain, "lognormal_pdf: sigma2 must be > 0");
  return std::exp(log_lognormal_pdf(n, mu, sigma2));
}

void MixtureSpec::validate() const {
  if (!(noise_var_s2 > 0.0)) throw Error(ErrorKind::Domain, "mixture: noise_var_s2 must be > 0");
  if (!(horizon_T > 0.0)) throw Error(ErrorKind::Domain, "mixture: horizon_T must be > 0");
  if (!(growth_g >= 0.0)) throw Error(ErrorKind::Domain, "mixture: growth_g must be >= 0");
  if (!(n0 > 0.0)) throw Error(ErrorKind::Domain, "mixture: n0 must be > 0");
  if (!(age_floor > 0.0 && age_floor <= horizon_T)) {
    throw Error(ErrorKind::Domain, "mixture: age_floor must be in (0, horizon_T]");
  }
}

double MixtureSpec::weight(double age) const {
  const double span = horizon_T - age_floor;
  if (age < age_floor || age > horizon_T || span <= 0.0) return 0.0;
  if (growth_g == 0.0) return 1.0 / span;
  // g e^{g (T - t)} / (e^{g (T - floor)} - 1), rewritten to avoid overflow.
  return growth_g * std::exp(-growth_g * (age - age_floor)) / -std::expm1(-growth_g * span);
}

double mixture_pdf(double n, const MixtureSpec& spec) {
  spec.validate();
  if (!(n > 0.0)) throw Error(ErrorKind::Domain, "mixture_pdf: n must be > 0");
  const double log_n0 = std::log(spec.n0);
  if (spec.age_floor == spec.horizon_T) {
    return lognormal_pdf(n, log_n0 + spec.drift_a * spec.horizon_T,
                         spec.noise_var_s2 * spec.horizon_T);
  }

  auto integrand = [&](double t) {
    return spec.weight(t) *
           std::exp(log_lognormal_pdf(n, log_n0 + spec.drift_a * t, spec.noise_var_s2 * t));
  };

  // The integrand peaks where the age's median passes through n.
  std::vector<double> breaks;
  if (spec.drift_a != 0.0) {
    const double t_star = (std::log(n) - log_n0) / spec.drift_a;
    if (t_star > spec.age_floor && t_star < spec.horizon_T) {
      const double width = std::sqrt(spec.noise_var_s2 * t_star) / std::abs(spec.drift_a);
      for (double k : {-3.0, -1.0, 0.0, 1.0, 3.0}) breaks.push_back(t_star + k * width);
    }
  }

  try {
    return integrate(integrand, spec.age_floor, spec.horizon_T, spec.quadrature, breaks).value;
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "mixture_pdf at n=" << n << ": " << e.what();
    throw Error(ErrorKind::Numerical, msg.str());
  }
}

double mixture_pdf(double n, const MixtureSpec& spec, std::span<const AgeAtom> atoms) {
  if (!(n > 0.0)) throw Error(ErrorKind::Domain, "mixture_pdf: n must be > 0");
  if (atoms.empty()) throw Error(ErrorKind::Domain, "mixture_pdf: no ages given");
  double total = 0.0, acc = 0.0;
  for (const auto& atom : atoms) {
    if (!(atom.age > 0.0) || !(atom.weight >= 0.0)) {
      throw Error(ErrorKind::Domain, "mixture_pdf: atoms need age > 0 and weight >= 0");
    }
    total += atom.weight;
    acc += atom.weight * lognormal_pdf(n, std::log(spec.n0) + spec.drift_a * atom.age,
                                       spec.noise_var_s2 * atom.age);
  }
  if (!(total > 0.0)) throw Error(ErrorKind::Domain, "mixture_pdf: weights sum to zero");
  return acc / total;
}

TailFit tail_exponent(const MixtureSpec& spec, double n_lo, double n_hi, std::size_t points) {
  spec.validate();
  if (!(n_lo > 0.0) || !(n_hi > n_lo)) {
    throw Error(ErrorKind::Domain, "tail_exponent: need 0 < n_lo < n_hi");
  }
  if (!(mixture_pdf(n_lo * 1.001, spec) < mixture_pdf(n_lo, spec))) {
    throw Error(ErrorKind::Domain, "tail_exponent: n_lo must lie beyond the mixture mode");
  }
  return tail_exponent_of([&](double n) { return mixture_pdf(n, spec); }, n_lo, n_hi, points);
}

TailStability tail_stability(const MixtureSpec& spec, double n_lo, double threshold) {
  TailStability out;
  out.lower = tail_exponent(spec, n_lo, 10.0 * n_lo);
  out.upper = tail_exponent(spec, 10.0 * n_lo, 100.0 * n_lo);
  out.slope_change = std::abs(out.upper.slope - out.lower.slope);
  out.power_law_stable = out.slope_change < threshold;
  return out;
}

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) throw Error(ErrorKind::Domain, "hurwitz_zeta: need s > 1, q > 0");
  // Euler-Maclaurin: direct sum of N terms plus the integral tail and
  // Bernoulli corrections.
  constexpr int kDirect = 20;
  constexpr std::array<double, 6> kBernoulli = {1.0 / 6.0,   -1.0 / 30.0, 1.0 / 42.0,
                                                -1.0 / 30.0, 5.0 / 66.0,  -691.0 / 2730.0};
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(k + q, -s);
  const double a = kDirect + q;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);

  double rising = s;         // s (s+1) ... (s+2j-2)
  double factorial = 2.0;    // (2j)!
  double power = std::pow(a, -s - 1.0);
  for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
    sum += kBernoulli[j - 1] / factorial * rising * power;
    rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    power /= a * a;
  }
  return sum;
}

FitComparison compare_fits(std::span<const double> sample, double cutoff) {
  if (sample.size() < 100) {
    throw Error(ErrorKind::Domain, "compare_fits: need at least 100 values");
  }
  std::vector<double> values(sample.begin(), sample.end());
  for (double v : values) {
    if (!(v > 0.0)) throw Error(ErrorKind::Domain, "compare_fits: values must be positive");
  }

  FitComparison out;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += std::log(v);
  out.lognormal_mu = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (std::log(v) - out.lognormal_mu) * (std::log(v) - out.lognormal_mu);
  out.lognormal_sigma2 = ss / n;
  if (!(out.lognormal_sigma2 > 0.0)) {
    throw Error(ErrorKind::DegenerateFit, "compare_fits: sample has no spread");
  }

  if (cutoff <= 0.0) {
    std::vector<double> sorted = values;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    cutoff = *mid;
  }
  const double xmin = std::max(1.0, std::ceil(cutoff - 1e-9));
  out.cutoff = xmin;

  std::vector<double> tail;
  for (double v : values) {
    const double k = std::round(v);
    if (k >= xmin) tail.push_back(k);
  }
  if (tail.empty()) {
    throw Error(ErrorKind::InsufficientTail, "compare_fits: no values at or above the cutoff");
  }
  out.tail_size = tail.size();
  const auto m = static_cast<double>(tail.size());

  // Discretized lognormal, truncated to k >= xmin.
  const double sigma = std::sqrt(out.lognormal_sigma2);
  auto z = [&](double x) { return (std::log(x) - out.lognormal_mu) / sigma; };
  const double log_norm = std::log(upper_normal(z(xmin - 0.5)));
  double ll_ln = 0.0;
  for (double k : tail) {
    const double mass = upper_normal(z(k - 0.5)) - upper_normal(z(k + 0.5));
    const double log_mass = mass > 1e-280 ? std::log(mass)
                                          : log_lognormal_pdf(k, out.lognormal_mu, out.lognormal_sigma2);
    ll_ln += log_mass - log_norm;
  }

  double sum_log_tail = 0.0;
  for (double k : tail) sum_log_tail += std::log(k);
  auto neg_ll = [&](double alpha) { return alpha * sum_log_tail + m * std::log(hurwitz_zeta(alpha, xmin)); };
  const auto [alpha, nll] = boost::math::tools::brent_find_minima(neg_ll, 1.0 + 1e-6, 30.0, 40);

  out.powerlaw_alpha = alpha;
  out.lognormal_loglik = ll_ln;
  out.powerlaw_loglik = -nll;
  out.loglik_difference = ll_ln - out.powerlaw_loglik;
  return out;
}

}  // namespace accrete
