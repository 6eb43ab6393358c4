#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "accrete/error.hpp"
#include "accrete/process.hpp"
#include "oracles.hpp"

using namespace accrete;

namespace {

ProcessParams base_params() {
  ProcessParams p;
  p.drift_a = 0.02;
  p.noise_var_s2 = 0.005;
  p.initial_edits_n0 = 1000.0;
  return p;
}

CorpusSpec constant_corpus(double horizon, double r0, std::uint64_t seed) {
  CorpusSpec s;
  s.horizon = horizon;
  s.rate = {RateModel::Kind::Constant, r0, 0.0};
  s.seed = seed;
  return s;
}

}  // namespace

TEST(StepArticle, ZeroNoiseIsExactGrowth) {
  ProcessParams p = base_params();
  p.noise_var_s2 = 0.0;
  Rng rng(1);
  const StepResult r = step_article(50.0, p, 0.0, rng);
  EXPECT_DOUBLE_EQ(r.state, 50.0 * std::exp(0.02));
  EXPECT_EQ(r.noise, 0.0);
}

TEST(StepArticle, StateStaysPositiveUnderHugeNoise) {
  ProcessParams p = base_params();
  p.noise_var_s2 = 25.0;
  Rng rng(3);
  double state = 1.0, noise = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const StepResult r = step_article(state, p, noise, rng);
    ASSERT_GT(r.state, 0.0);
    state = std::clamp(r.state, 1e-100, 1e100);
    noise = r.noise;
  }
}

TEST(StepArticle, RealizedNoiseIsAr1) {
  ProcessParams p = base_params();
  p.noise_autocorr_rho = 0.3;
  Rng rng(11);
  std::vector<double> xi;
  double noise = 0.0;
  for (int i = 0; i < 100000; ++i) {
    noise = step_article(1.0, p, noise, rng).noise;
    xi.push_back(noise);
  }
  EXPECT_NEAR(oracle::autocorr(xi, 1), 0.3, 0.02);
  EXPECT_NEAR(oracle::autocorr(xi, 2), 0.09, 0.02);
  EXPECT_NEAR(oracle::variance(xi), 0.005, 0.0002);
}

TEST(StepArticle, RejectsBadInput) {
  Rng rng(1);
  ProcessParams p = base_params();
  EXPECT_THROW(step_article(0.0, p, 0.0, rng), Error);
  p.noise_autocorr_rho = 1.0;
  EXPECT_THROW(step_article(1.0, p, 0.0, rng), Error);
}

TEST(ProcessParams, DomainChecks) {
  auto bad = [](auto mutate) {
    ProcessParams p = base_params();
    mutate(p);
    try {
      p.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Domain;
    }
    return false;
  };
  EXPECT_TRUE(bad([](ProcessParams& p) { p.drift_a = -1.0; }));
  EXPECT_TRUE(bad([](ProcessParams& p) { p.noise_var_s2 = -1e-9; }));
  EXPECT_TRUE(bad([](ProcessParams& p) { p.noise_autocorr_rho = -0.1; }));
  EXPECT_TRUE(bad([](ProcessParams& p) { p.step_dt = 0.0; }));
  EXPECT_TRUE(bad([](ProcessParams& p) { p.initial_edits_n0 = 0.5; }));
  EXPECT_TRUE(bad([](ProcessParams& p) { p.drift_a = std::nan(""); }));
  EXPECT_NO_THROW(base_params().validate());
}

TEST(SimulateArticle, LogMomentsMatchTheory) {
  const ProcessParams p = base_params();
  const std::size_t steps = 200;
  std::vector<double> logs;
  Rng rng(2024);
  for (int i = 0; i < 20000; ++i) {
    logs.push_back(std::log(simulate_article(p, steps, rng, Trajectory::Endpoints).final_latent()));
  }
  // Oracle: sum of iid N(a, s2) increments.
  const double mu = std::log(1000.0) + 0.02 * steps;
  const double s2 = 0.005 * steps;
  const double n = static_cast<double>(logs.size());
  EXPECT_NEAR(oracle::mean(logs), mu, 4.0 * std::sqrt(s2 / n));
  EXPECT_NEAR(oracle::variance(logs), s2, 4.0 * s2 * std::sqrt(2.0 / (n - 1.0)));
  const Moments m = theoretical_moments(p, 200.0);
  EXPECT_DOUBLE_EQ(m.mu, mu);
  EXPECT_DOUBLE_EQ(m.sigma2, s2);
}

TEST(SimulateArticle, StationaryStartWithCorrelatedNoise) {
  ProcessParams p = base_params();
  p.noise_autocorr_rho = 0.6;
  p.drift_a = 0.0;
  // One step from a stationary xi_0: xi_1 still has variance s2.
  std::vector<double> first;
  Rng rng(5);
  for (int i = 0; i < 40000; ++i) {
    first.push_back(std::log(simulate_article(p, 1, rng).latent[1] / 1000.0));
  }
  EXPECT_NEAR(oracle::variance(first), 0.005, 0.0003);
}

TEST(SimulateArticle, FullAndEndpointsAgree) {
  const ProcessParams p = base_params();
  const ArticleSeries full = simulate_article(p, 300, 77, Trajectory::Full);
  const ArticleSeries ends = simulate_article(p, 300, 77, Trajectory::Endpoints);
  ASSERT_EQ(full.counts.size(), 301u);
  ASSERT_EQ(ends.counts.size(), 2u);
  EXPECT_EQ(full.final_count(), ends.final_count());
  EXPECT_DOUBLE_EQ(full.final_latent(), ends.final_latent());
  EXPECT_EQ(full.counts.front(), 1000);
}

TEST(SimulateArticle, CountsAreRoundedLatentAndAtLeastOne) {
  ProcessParams p;
  p.drift_a = -0.5;
  p.noise_var_s2 = 0.5;
  p.initial_edits_n0 = 3.0;
  const ArticleSeries s = simulate_article(p, 100, 9);
  for (std::size_t k = 0; k < s.counts.size(); ++k) {
    EXPECT_GE(s.counts[k], 1);
    EXPECT_EQ(s.counts[k], std::max<std::int64_t>(1, std::llround(s.latent[k])));
  }
}

TEST(CreationTimes, ConstantRateCountIsPoisson) {
  std::vector<double> counts;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    counts.push_back(static_cast<double>(draw_creation_times(constant_corpus(100.0, 5.0, seed)).size()));
  }
  const double n = static_cast<double>(counts.size());
  EXPECT_NEAR(oracle::mean(counts), 500.0, 4.0 * std::sqrt(500.0 / n));
  // Poisson: variance equals the mean; sd of the sample variance is about mean*sqrt(2/n).
  EXPECT_NEAR(oracle::variance(counts), 500.0, 4.0 * 500.0 * std::sqrt(2.0 / n));
}

TEST(CreationTimes, ThinningFollowsExponentialRate) {
  CorpusSpec s;
  s.horizon = 50.0;
  s.rate = {RateModel::Kind::Exponential, 20.0, 0.05};
  s.seed = 31;
  const std::vector<double> t = draw_creation_times(s);
  ASSERT_TRUE(std::is_sorted(t.begin(), t.end()));
  const double g = 0.05, H = 50.0;
  const double d =
      oracle::ks_distance(t, [&](double x) { return std::expm1(g * x) / std::expm1(g * H); });
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(t.size())));  // 1% level
  EXPECT_NEAR(static_cast<double>(t.size()), s.rate.integrated(H),
              4.0 * std::sqrt(s.rate.integrated(H)));
}

TEST(CreationTimes, FixedCountIsExact) {
  CorpusSpec s = constant_corpus(30.0, 1.0, 8);
  s.article_count = 10;
  const auto t = draw_creation_times(s);
  EXPECT_EQ(t.size(), 10u);
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
  for (double x : t) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 30.0);
  }
}

TEST(SimulateCorpus, StepsFollowCreationTime) {
  ProcessParams p = base_params();
  p.step_dt = 2.5;
  const auto corpus = simulate_corpus(p, constant_corpus(100.0, 3.0, 4));
  ASSERT_FALSE(corpus.empty());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(corpus[i].index, i);
    EXPECT_EQ(corpus[i].n_steps,
              static_cast<std::size_t>(std::floor((100.0 - corpus[i].creation_time) / 2.5)));
    EXPECT_EQ(corpus[i].counts.size(), corpus[i].n_steps + 1);
  }
}

TEST(SimulateCorpus, DeterministicAcrossThreadCounts) {
  const ProcessParams p = base_params();
  const CorpusSpec s = constant_corpus(200.0, 10.0, 99);
  const auto one = simulate_corpus(p, s, {Trajectory::Full, 1});
  const auto four = simulate_corpus(p, s, {Trajectory::Full, 4});
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].counts, four[i].counts);
    EXPECT_EQ(one[i].latent, four[i].latent);
  }
  const auto other = simulate_corpus(p, constant_corpus(200.0, 10.0, 100));
  EXPECT_TRUE(other.size() != one.size() || other.back().latent != one.back().latent);
}

TEST(SimulateCorpus, HorizonShorterThanStepIsDegenerate) {
  ProcessParams p = base_params();
  p.step_dt = 10.0;
  try {
    simulate_corpus(p, constant_corpus(5.0, 1.0, 1));
    FAIL() << "expected a degenerate-corpus error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateCorpus);
  }
}

TEST(SimulateCorpus, FixedCountGivesDistinctArticles) {
  CorpusSpec s = constant_corpus(50.0, 1.0, 3);
  s.article_count = 10;
  const auto corpus = simulate_corpus(base_params(), s);
  std::set<std::size_t> ids;
  for (const auto& a : corpus) ids.insert(a.index);
  EXPECT_EQ(ids.size(), 10u);
}

TEST(StepArticle, WorkedValues) {
  ProcessParams p;
  p.drift_a = 0.1;
  Rng rng(1);
  EXPECT_NEAR(step_article(10.0, p, 0.0, rng).state, 11.0517, 1e-4);
  p.drift_a = 0.0;
  EXPECT_DOUBLE_EQ(step_article(7.0, p, 0.0, rng).state, 7.0);
}

TEST(StepArticle, MillionDrawMeanLogGrowth) {
  ProcessParams p;
  p.drift_a = 0.05;
  p.noise_var_s2 = 0.01;
  Rng rng(12345);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += std::log(step_article(10.0, p, 0.0, rng).state / 10.0);
  EXPECT_NEAR(sum / n, 0.05, 3e-4);
}

TEST(SimulateArticle, DeterministicCases) {
  ProcessParams p;
  p.drift_a = 0.1;
  const ArticleSeries s = simulate_article(p, 10, 1);
  EXPECT_NEAR(s.final_latent(), std::exp(1.0), 1e-12);
  EXPECT_EQ(s.final_count(), 3);
  for (std::size_t k = 1; k < s.counts.size(); ++k) EXPECT_GE(s.counts[k], s.counts[k - 1]);

  ProcessParams frozen;
  frozen.initial_edits_n0 = 5.0;
  for (std::int64_t c : simulate_article(frozen, 37, 2).counts) EXPECT_EQ(c, 5);
}

TEST(SimulateArticle, EnsembleAt500Steps) {
  ProcessParams p;
  p.drift_a = 0.02;
  p.noise_var_s2 = 0.005;
  std::vector<double> logs;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    logs.push_back(std::log(simulate_article(p, 500, seed, Trajectory::Endpoints).final_latent()));
  }
  EXPECT_NEAR(oracle::mean(logs), 10.0, 0.05);
  EXPECT_NEAR(oracle::variance(logs), 2.5, 0.1);
}

TEST(SimulateArticle, FixedAgeLogLatentIsNormal) {
  ProcessParams p;
  p.drift_a = 0.02;
  p.noise_var_s2 = 0.005;
  const std::size_t steps = 50;
  const double mu = 0.02 * steps, sd = std::sqrt(0.005 * steps);
  int rejections = 0;
  Rng rng(77);
  for (int experiment = 0; experiment < 100; ++experiment) {
    std::vector<double> logs;
    for (int i = 0; i < 10000; ++i) {
      logs.push_back(std::log(simulate_article(p, steps, rng, Trajectory::Endpoints).final_latent()));
    }
    const double d = oracle::ks_distance(logs, [&](double x) {
      return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0)));
    });
    if (d > 1.628 / std::sqrt(10000.0)) ++rejections;  // 1% critical value
  }
  EXPECT_LE(rejections, 2);
}

TEST(SimulateArticle, MomentsGrowLinearlyWithSteps) {
  ProcessParams p;
  p.drift_a = 0.02;
  p.noise_var_s2 = 0.002;
  p.initial_edits_n0 = 10.0;
  const std::size_t steps = 100, articles = 10000;
  std::vector<double> sum(steps + 1, 0.0), sum2(steps + 1, 0.0);
  Rng rng(4);
  for (std::size_t i = 0; i < articles; ++i) {
    const ArticleSeries s = simulate_article(p, steps, rng);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double l = std::log(s.latent[k]);
      sum[k] += l;
      sum2[k] += l * l;
    }
  }
  // Plain least squares written out here as the oracle.
  auto ols = [](const std::vector<double>& y) {
    const double n = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double x = static_cast<double>(k);
      sx += x, sy += y[k], sxx += x * x, sxy += x * y[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::pair{slope, (sy - slope * sx) / n};
  };
  std::vector<double> means(steps + 1), vars(steps + 1);
  const double n = static_cast<double>(articles);
  for (std::size_t k = 0; k <= steps; ++k) {
    means[k] = sum[k] / n;
    vars[k] = (sum2[k] - n * means[k] * means[k]) / (n - 1.0);
  }
  const auto [a_hat, b_hat] = ols(means);
  EXPECT_NEAR(a_hat, 0.02, 0.02 * 0.02);
  EXPECT_NEAR(b_hat, std::log(10.0), 0.02 * std::log(10.0));
  EXPECT_NEAR(ols(vars).first, 0.002, 0.02 * 0.002);
}

TEST(TheoreticalMoments, DirectEvaluation) {
  ProcessParams p;
  p.drift_a = 0.1;
  p.noise_var_s2 = 0.01;
  const Moments m = theoretical_moments(p, 100.0);
  EXPECT_NEAR(m.mu, 10.0, 1e-12);
  EXPECT_NEAR(m.sigma2, 1.0, 1e-12);
  p.initial_edits_n0 = 4.0;
  const Moments zero = theoretical_moments(p, 0.0);
  EXPECT_DOUBLE_EQ(zero.mu, std::log(4.0));
  EXPECT_EQ(zero.sigma2, 0.0);
  p.step_dt = 2.0;
  EXPECT_NEAR(theoretical_moments(p, 100.0).mu, std::log(4.0) + 5.0, 1e-12);
  EXPECT_THROW(theoretical_moments(p, -1.0), Error);
}

TEST(CreationTimes, WorkedCounts) {
  const double n = static_cast<double>(draw_creation_times(constant_corpus(100.0, 10.0, 17)).size());
  EXPECT_NEAR(n, 1000.0, 3.0 * std::sqrt(1000.0));
  CorpusSpec s;
  s.horizon = 100.0;
  s.rate = {RateModel::Kind::Exponential, 1.0, 0.05};
  s.seed = 17;
  const double expected = std::expm1(5.0) / 0.05;
  EXPECT_NEAR(s.rate.integrated(100.0), expected, 1e-9);
  EXPECT_NEAR(static_cast<double>(draw_creation_times(s).size()), expected, 3.0 * std::sqrt(expected));
}

TEST(SimulateCorpus, HalfStepHorizon) {
  EXPECT_THROW(simulate_corpus(base_params(), constant_corpus(0.5, 1.0, 1)), Error);
}
