#pragma once

// Slice-by-slice lognormal fitting. Articles are grouped into creation-time
// slices; within a slice the log edit counts should be Normal(mu, sigma2), and
// across slices mu and sigma2 should grow linearly with age.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "accrete/ingest.hpp"
#include "accrete/process.hpp"

namespace accrete {

struct ArticleObservation {
  std::string article_id;
  double creation_time = 0.0;  // analysis time units
  double edits = 0.0;
};

/// Rollups to observations, converting seconds to analysis time units.
std::vector<ArticleObservation> observations_from(std::span<const ArticleRollup> rollups,
                                                  double time_unit_seconds);
/// Simulated series to observations using their final counts.
std::vector<ArticleObservation> observations_from(std::span<const ArticleSeries> corpus);

struct SliceOptions {
  std::size_t min_slice_size = 400;
  double cutoff = 0.0;  // analysis time; ages are cutoff - creation_time
  // Slice boundaries snap to multiples of this period (e.g. one week); 0
  // closes a slice right after the article that reaches min_slice_size,
  // keeping ties on the creation time together.
  double boundary_period = 0.0;
};

struct Slice {
  std::size_t id = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  double mean_age = 0.0;
  std::vector<double> members;  // edit counts
  std::vector<std::string> article_ids;
};

struct Slicing {
  std::vector<Slice> slices;
  std::size_t excluded_remainder = 0;  // trailing articles too few for a slice
};

Slicing make_slices(std::vector<ArticleObservation> articles, const SliceOptions& opts);

struct SliceFit {
  double mu = 0.0;
  double sigma2 = 0.0;
  std::size_t n_articles = 0;
  // Filled by gof_test.
  bool tested = false;
  bool testable = false;  // false when fewer than 4 bins were possible
  double g_statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::size_t n_bins = 0;
};

/// Sample mean and unbiased sample variance of the natural-log counts.
SliceFit fit_slice(std::span<const double> members);
inline SliceFit fit_slice(const Slice& slice) { return fit_slice(slice.members); }

struct GofOptions {
  double min_expected = 8.0;
  int grid_divisions = 5;  // fine grid width sigma / grid_divisions
  bool integer_lattice = true;  // snap edges to half-integers when all members are integers
};

struct GofBin {
  double lo_z;  // standardized edges; -inf / +inf at the tails
  double hi_z;
  double expected;
  std::size_t observed;
};

/// Bins in standardized log space: fine grid cells anchored at mu are merged
/// left to right until the expected count exceeds min_expected; a trailing
/// remainder is merged into the last bin. For all-integer members each edge
/// is moved to the nearest half-integer count below it.
std::vector<GofBin> gof_bins(std::span<const double> members, const SliceFit& fitted,
                             const GofOptions& opts = {});

/// 2 * sum observed * log(observed / expected), empty bins contributing 0.
double g_statistic(std::span<const GofBin> bins);

/// Likelihood-ratio (G) test of the fitted lognormal; dof = bins - 3.
SliceFit gof_test(std::span<const double> members, const SliceFit& fitted,
                  const GofOptions& opts = {});
inline SliceFit gof_test(const Slice& slice, const SliceFit& fitted, const GofOptions& opts = {}) {
  return gof_test(slice.members, fitted, opts);
}

struct AgedFit {
  std::size_t slice_id = 0;
  double mean_age = 0.0;
  SliceFit fit;
};

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_used = 0;
  std::vector<std::size_t> excluded_slices;
};

struct TrendPair {
  TrendFit mu;
  TrendFit sigma2;
};

/// OLS of mu and sigma2 against mean age. Slices whose residual exceeds
/// outlier_z residual standard errors are excluded and each line is refit once.
TrendPair fit_trend(std::span<const AgedFit> fits, double outlier_z = 3.0);

/// Sample autocorrelation at lags 1..max_lag of the pooled per-period fractional
/// increases dn/n (n = edits before the period; periods with n = 0 skipped).
std::vector<double> estimate_autocorr(std::span<const std::vector<double>> per_period_counts,
                                      std::size_t max_lag);

/// Per-slice results as TSV (slice_id start end mean_age n mu sigma2 g dof p).
void write_slice_fits(std::ostream& out, std::span<const Slice> slices,
                      std::span<const SliceFit> fits, std::string_view schema_comment = {});

}  // namespace accrete
