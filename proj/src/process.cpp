#include "accrete/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accrete/error.hpp"
#include "accrete/parallel.hpp"

namespace accrete {
namespace {

[[noreturn]] void domain(const std::string& what) { throw Error(ErrorKind::Domain, what); }

// The creation edit is never lost, so the observed count is at least 1.
std::int64_t to_count(double latent) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(latent)));
}

}  // namespace

void ProcessParams::validate() const {
  if (!(drift_a > -1.0)) domain("drift_a must be > -1");
  if (!(noise_var_s2 >= 0.0)) domain("noise_var_s2 must be >= 0");
  if (!(noise_autocorr_rho >= 0.0 && noise_autocorr_rho < 1.0)) {
    domain("noise_autocorr_rho must be in [0, 1)");
  }
  if (!(step_dt > 0.0)) domain("step_dt must be > 0");
  if (!(initial_edits_n0 >= 1.0)) domain("initial_edits_n0 must be >= 1");
}

StepResult step_article(double state, const ProcessParams& params, double noise_prev, Rng& rng) {
  params.validate();
  if (!(state > 0.0)) domain("step_article: state must be > 0");

  const double rho = params.noise_autocorr_rho;
  double xi = rho * noise_prev;
  if (params.noise_var_s2 > 0.0) {
    std::normal_distribution<double> eta(0.0, std::sqrt(params.noise_var_s2));
    xi += std::sqrt(1.0 - rho * rho) * eta(rng);
  }
  // Log-space update keeps the state positive for any xi.
  return {state * std::exp(params.drift_a + xi), xi};
}

ArticleSeries simulate_article(const ProcessParams& params, std::size_t n_steps, Rng& rng,
                               Trajectory mode) {
  params.validate();
  ArticleSeries series;
  series.step_dt = params.step_dt;
  series.n_steps = n_steps;

  const double sd = std::sqrt(params.noise_var_s2);
  const double rho = params.noise_autocorr_rho;
  const double innovation_scale = std::sqrt(1.0 - rho * rho);
  std::normal_distribution<double> eta(0.0, 1.0);

  double state = params.initial_edits_n0;
  double noise = 0.0;
  if (rho > 0.0 && sd > 0.0) noise = sd * eta(rng);  // stationary start

  const std::size_t keep = mode == Trajectory::Full ? n_steps + 1 : 2;
  series.latent.reserve(keep);
  series.counts.reserve(keep);
  series.latent.push_back(state);
  series.counts.push_back(to_count(state));

  double log_state = std::log(state);
  for (std::size_t k = 0; k < n_steps; ++k) {
    double xi = rho * noise;
    if (sd > 0.0) xi += innovation_scale * sd * eta(rng);
    noise = xi;
    log_state += params.drift_a + xi;
    state = std::exp(log_state);
    if (mode == Trajectory::Full) {
      series.latent.push_back(state);
      series.counts.push_back(to_count(state));
    }
  }
  if (mode == Trajectory::Endpoints) {
    series.latent.push_back(state);
    series.counts.push_back(to_count(state));
  }
  return series;
}

ArticleSeries simulate_article(const ProcessParams& params, std::size_t n_steps,
                               std::uint64_t seed, Trajectory mode) {
  Rng rng(seed);
  return simulate_article(params, n_steps, rng, mode);
}

double RateModel::rate(double t) const {
  return kind == Kind::Constant ? r0 : r0 * std::exp(g * t);
}

double RateModel::max_rate(double horizon) const {
  return kind == Kind::Constant ? r0 : r0 * std::exp(std::max(g, 0.0) * horizon);
}

double RateModel::integrated(double horizon) const {
  if (kind == Kind::Constant || g == 0.0) return r0 * horizon;
  return r0 * std::expm1(g * horizon) / g;
}

void RateModel::validate() const {
  if (!(r0 > 0.0)) domain("rate r0 must be > 0");
  if (kind == Kind::Exponential && !(g >= 0.0)) domain("rate growth g must be >= 0");
}

void CorpusSpec::validate() const {
  if (!(horizon > 0.0)) domain("corpus horizon must be > 0");
  rate.validate();
}

std::vector<double> draw_creation_times(const CorpusSpec& spec) {
  spec.validate();
  Rng rng = make_stream(spec.seed, kCreationStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rmax = spec.rate.max_rate(spec.horizon);

  std::vector<double> times;
  if (spec.article_count) {
    // Conditional on the count, creation times are i.i.d. with density
    // proportional to the rate; rejection against the max rate.
    times.reserve(*spec.article_count);
    while (times.size() < *spec.article_count) {
      const double t = spec.horizon * unit(rng);
      if (unit(rng) * rmax <= spec.rate.rate(t)) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
  } else {
    // Thinning: homogeneous Poisson at rmax, keep each point w.p. rate(t)/rmax.
    std::exponential_distribution<double> gap(rmax);
    times.reserve(static_cast<std::size_t>(spec.rate.integrated(spec.horizon) * 1.1) + 16);
    for (double t = gap(rng); t < spec.horizon; t += gap(rng)) {
      if (unit(rng) * rmax <= spec.rate.rate(t)) times.push_back(t);
    }
  }
  return times;
}

std::vector<ArticleSeries> simulate_corpus(const ProcessParams& params, const CorpusSpec& spec,
                                           const CorpusOptions& options) {
  params.validate();
  spec.validate();
  if (spec.horizon < params.step_dt) {
    std::ostringstream msg;
    msg << "horizon " << spec.horizon << " is shorter than one step (" << params.step_dt << ")";
    throw Error(ErrorKind::DegenerateCorpus, msg.str());
  }

  const std::vector<double> times = draw_creation_times(spec);
  std::vector<ArticleSeries> corpus(times.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto steps =
          static_cast<std::size_t>(std::floor((spec.horizon - times[i]) / params.step_dt));
      Rng rng = make_stream(spec.seed, kArticleStream + i);
      corpus[i] = simulate_article(params, steps, rng, options.trajectory);
      corpus[i].index = i;
      corpus[i].creation_time = times[i];
    }
  };

  parallel_for(corpus.size(), options.threads, work);
  return corpus;
}

Moments theoretical_moments(const ProcessParams& params, double age) {
  params.validate();
  if (!(age >= 0.0)) domain("theoretical_moments: age must be >= 0");
  const double steps = age / params.step_dt;
  return {std::log(params.initial_edits_n0) + params.drift_a * steps,
          params.noise_var_s2 * steps};
}

}  // namespace accrete
