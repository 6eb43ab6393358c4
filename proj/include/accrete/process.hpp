#pragma once

// Multiplicative edit accretion. Each step an article's latent edit level is
// multiplied by exp(a + xi), where xi is mean-zero Gaussian noise, optionally
// AR(1)-correlated across steps. Observed counts are the rounded latent level.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "accrete/rng.hpp"

namespace accrete {

struct ProcessParams {
  double drift_a = 0.0;             // mean log growth per step
  double noise_var_s2 = 0.0;        // variance of xi per step
  double noise_autocorr_rho = 0.0;  // lag-1 autocorrelation of xi, in [0, 1)
  double step_dt = 1.0;             // time units per step
  double initial_edits_n0 = 1.0;    // starting edit count, >= 1

  /// Throws Error(Domain) naming the first violated constraint.
  void validate() const;
};

struct StepResult {
  double state;
  double noise;  // the realized xi, to be fed back as noise_prev
};

/// One step: xi = rho * noise_prev + sqrt(1 - rho^2) * eta with eta ~ N(0, s2),
/// new_state = state * exp(a + xi).
StepResult step_article(double state, const ProcessParams& params, double noise_prev, Rng& rng);

enum class Trajectory {
  Full,       // every step is recorded
  Endpoints,  // only the initial and the final state
};

struct ArticleSeries {
  std::size_t index = 0;
  double creation_time = 0.0;
  double step_dt = 1.0;
  std::size_t n_steps = 0;
  // Counts and latent levels at step times. With Trajectory::Full these have
  // n_steps + 1 entries; with Endpoints they hold the first and last state.
  std::vector<std::int64_t> counts;
  std::vector<double> latent;

  std::int64_t final_count() const { return counts.back(); }
  double final_latent() const { return latent.back(); }
  double age_at(double time) const { return time - creation_time; }
};

/// Simulates n_steps steps from initial_edits_n0. With rho > 0 the noise chain
/// starts from its stationary distribution.
ArticleSeries simulate_article(const ProcessParams& params, std::size_t n_steps,
                               std::uint64_t seed, Trajectory mode = Trajectory::Full);
ArticleSeries simulate_article(const ProcessParams& params, std::size_t n_steps, Rng& rng,
                               Trajectory mode = Trajectory::Full);

struct RateModel {
  enum class Kind { Constant, Exponential };
  Kind kind = Kind::Constant;
  double r0 = 1.0;  // articles per time unit at t = 0
  double g = 0.0;   // exponential growth rate, Exponential only

  double rate(double t) const;
  double max_rate(double horizon) const;
  /// Expected number of articles created in [0, horizon].
  double integrated(double horizon) const;
  void validate() const;
};

struct CorpusSpec {
  double horizon = 1.0;
  RateModel rate;
  std::uint64_t seed = 0;
  // When set, exactly this many articles are created, with creation times
  // i.i.d. from the density proportional to the rate. Otherwise the count is
  // Poisson around rate.integrated(horizon).
  std::optional<std::size_t> article_count;

  void validate() const;
};

struct CorpusOptions {
  Trajectory trajectory = Trajectory::Full;
  unsigned threads = 1;
};

/// Articles sorted by creation time; article i is simulated from its own RNG
/// stream for floor((horizon - creation_time) / step_dt) steps.
std::vector<ArticleSeries> simulate_corpus(const ProcessParams& params, const CorpusSpec& spec,
                                           const CorpusOptions& options = {});

/// Creation times only (sorted); exposed for testing the thinning sampler.
std::vector<double> draw_creation_times(const CorpusSpec& spec);

struct Moments {
  double mu;
  double sigma2;
};

/// mu = log(n0) + a * age / dt, sigma2 = s2 * age / dt. Exact only for rho = 0;
/// no correction is applied for correlated noise.
Moments theoretical_moments(const ProcessParams& params, double age);

}  // namespace accrete
