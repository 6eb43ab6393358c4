#include "accrete/fitstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "accrete/error.hpp"
#include "accrete/numerics.hpp"
#include "accrete/synth.hpp"

namespace accrete {

std::vector<ArticleObservation> observations_from(std::span<const ArticleRollup> rollups,
                                                  double time_unit_seconds) {
  if (!(time_unit_seconds > 0.0)) throw Error(ErrorKind::Domain, "time unit must be > 0");
  std::vector<ArticleObservation> out;
  out.reserve(rollups.size());
  for (const auto& r : rollups) {
    out.push_back({r.article_id, static_cast<double>(r.creation_time) / time_unit_seconds,
                   static_cast<double>(r.edit_count)});
  }
  return out;
}

std::vector<ArticleObservation> observations_from(std::span<const ArticleSeries> corpus) {
  std::vector<ArticleObservation> out;
  out.reserve(corpus.size());
  for (const auto& a : corpus) {
    out.push_back({article_id_for(a.index), a.creation_time, static_cast<double>(a.final_count())});
  }
  return out;
}

Slicing make_slices(std::vector<ArticleObservation> articles, const SliceOptions& opts) {
  if (opts.min_slice_size < 50) throw Error(ErrorKind::Domain, "min_slice_size must be >= 50");
  if (opts.boundary_period < 0.0) throw Error(ErrorKind::Domain, "boundary_period must be >= 0");
  if (articles.size() < opts.min_slice_size) {
    std::ostringstream msg;
    msg << "only " << articles.size() << " articles; a slice needs " << opts.min_slice_size;
    throw Error(ErrorKind::NoSlices, msg.str());
  }

  std::stable_sort(articles.begin(), articles.end(),
                   [](const ArticleObservation& a, const ArticleObservation& b) {
                     return a.creation_time < b.creation_time;
                   });

  const double period = opts.boundary_period;
  auto bucket = [period](double t) { return std::floor(t / period); };
  auto same_group = [&](double a, double b) {
    return period > 0.0 ? bucket(a) == bucket(b) : a == b;
  };

  Slicing out;
  std::size_t begin = 0;
  while (begin < articles.size()) {
    if (articles.size() - begin < opts.min_slice_size) {
      out.excluded_remainder = articles.size() - begin;
      break;
    }
    std::size_t end = begin + opts.min_slice_size;
    while (end < articles.size() &&
           same_group(articles[end].creation_time, articles[end - 1].creation_time)) {
      ++end;
    }

    Slice s;
    s.id = out.slices.size();
    const double first = articles[begin].creation_time;
    const double last = articles[end - 1].creation_time;
    if (period > 0.0) {
      s.start_time = bucket(first) * period;
      s.end_time = (bucket(last) + 1.0) * period;
    } else {
      s.start_time = first;
      s.end_time = end < articles.size() ? articles[end].creation_time
                                         : std::nextafter(last, std::numeric_limits<double>::infinity());
    }
    double sum_t = 0.0;
    s.members.reserve(end - begin);
    s.article_ids.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      sum_t += articles[i].creation_time;
      s.members.push_back(articles[i].edits);
      s.article_ids.push_back(std::move(articles[i].article_id));
    }
    s.mean_age = opts.cutoff - sum_t / static_cast<double>(end - begin);
    out.slices.push_back(std::move(s));
    begin = end;
  }
  return out;
}

SliceFit fit_slice(std::span<const double> members) {
  if (members.empty()) throw Error(ErrorKind::Domain, "fit_slice: empty slice");
  for (double m : members) {
    if (!(m > 0.0)) throw Error(ErrorKind::Domain, "fit_slice: counts must be positive");
  }
  // Shifted by the first log so a constant slice has exactly zero variance.
  const double shift = std::log(members[0]);
  double sum = 0.0;
  for (double m : members) sum += std::log(m) - shift;
  const auto n = static_cast<double>(members.size());
  const double mean = sum / n;
  SliceFit fit;
  fit.n_articles = members.size();
  fit.mu = shift + mean;
  if (members.size() > 1) {
    double ss = 0.0;
    for (double m : members) {
      const double d = (std::log(m) - shift) - mean;
      ss += d * d;
    }
    fit.sigma2 = ss / (n - 1.0);
  }
  return fit;
}

std::vector<GofBin> gof_bins(std::span<const double> members, const SliceFit& fitted,
                             const GofOptions& opts) {
  if (!(fitted.sigma2 > 0.0)) {
    throw Error(ErrorKind::DegenerateFit, "gof_test: fitted sigma2 is zero");
  }
  if (!(opts.min_expected > 0.0)) throw Error(ErrorKind::Domain, "min_expected must be > 0");
  if (opts.grid_divisions < 1) throw Error(ErrorKind::Domain, "grid_divisions must be >= 1");

  const double n = static_cast<double>(members.size());
  const double inf = std::numeric_limits<double>::infinity();
  // Grid edges at z = k / divisions for |z| <= 10; beyond that the normal mass
  // is below 1e-23 and belongs to the open tail cells.
  const int half = 10 * opts.grid_divisions;

  const double sigma = std::sqrt(fitted.sigma2);
  // Integer counts are rounded draws: count k stands for the latent interval
  // [k - 0.5, k + 0.5), so edges move to half-integers in count space.
  const bool lattice =
      opts.integer_lattice &&
      std::all_of(members.begin(), members.end(), [](double m) { return m == std::floor(m); });
  auto edge = [&](int k) {
    const double z = static_cast<double>(k) / opts.grid_divisions;
    if (!lattice) return z;
    const double c = std::exp(fitted.mu + sigma * z);
    if (!std::isfinite(c)) return inf;
    return (std::log(std::floor(c) + 0.5) - fitted.mu) / sigma;
  };

  std::vector<GofBin> bins;
  double lo = -inf;
  for (int k = -half; k <= half + 1; ++k) {
    const double hi = k <= half ? edge(k) : inf;
    if (hi <= lo) continue;
    const double expected = n * (normal_cdf(hi) - normal_cdf(lo));
    if (expected > opts.min_expected) {
      bins.push_back({lo, hi, expected, 0});
      lo = hi;
    }
  }
  if (lo != inf) {
    // Remainder below the threshold merges backward.
    if (bins.empty()) {
      bins.push_back({-inf, inf, n, 0});
    } else {
      bins.back().hi_z = inf;
      bins.back().expected = n * (1.0 - normal_cdf(bins.back().lo_z));
    }
  }

  for (double m : members) {
    if (!(m > 0.0)) throw Error(ErrorKind::Domain, "gof_test: counts must be positive");
    const double z = (std::log(m) - fitted.mu) / sigma;
    auto it = std::upper_bound(bins.begin(), bins.end(), z,
                               [](double v, const GofBin& b) { return v < b.hi_z; });
    if (it == bins.end()) --it;
    ++it->observed;
  }
  return bins;
}

double g_statistic(std::span<const GofBin> bins) {
  double g = 0.0;
  for (const auto& b : bins) {
    if (b.observed > 0) {
      const double o = static_cast<double>(b.observed);
      g += o * std::log(o / b.expected);
    }
  }
  return std::max(0.0, 2.0 * g);
}

SliceFit gof_test(std::span<const double> members, const SliceFit& fitted,
                  const GofOptions& opts) {
  const std::vector<GofBin> bins = gof_bins(members, fitted, opts);
  SliceFit out = fitted;
  out.tested = true;
  out.n_bins = bins.size();
  out.dof = static_cast<int>(bins.size()) - 3;
  if (out.dof < 1) {
    out.testable = false;
    out.g_statistic = 0.0;
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.testable = true;
  out.g_statistic = g_statistic(bins);
  out.p_value = chi2_upper_tail(out.g_statistic, out.dof);
  return out;
}

namespace {

TrendFit robust_line(std::span<const AgedFit> fits, double outlier_z, bool use_mu) {
  std::vector<double> x, y;
  x.reserve(fits.size());
  y.reserve(fits.size());
  for (const auto& f : fits) {
    x.push_back(f.mean_age);
    y.push_back(use_mu ? f.fit.mu : f.fit.sigma2);
  }
  LinearFit line = fit_line(x, y);

  TrendFit out;
  // An exact line has residual_se at rounding level; nothing is an outlier then.
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const bool noisy = line.residual_se > 1e-12 * std::max(1.0, scale);
  std::vector<double> kx, ky;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const double r = y[i] - (line.intercept + line.slope * x[i]);
    if (noisy && std::abs(r) > outlier_z * line.residual_se) {
      out.excluded_slices.push_back(fits[i].slice_id);
    } else {
      kx.push_back(x[i]);
      ky.push_back(y[i]);
    }
  }
  if (!out.excluded_slices.empty()) {
    if (kx.size() < 3) {
      throw Error(ErrorKind::InsufficientData, "fit_trend: fewer than 3 slices survive outlier removal");
    }
    line = fit_line(kx, ky);
  }
  out.slope = line.slope;
  out.intercept = line.intercept;
  out.r_squared = line.r_squared;
  out.n_used = kx.size();
  return out;
}

}  // namespace

TrendPair fit_trend(std::span<const AgedFit> fits, double outlier_z) {
  if (fits.size() < 3) {
    throw Error(ErrorKind::InsufficientData, "fit_trend: need at least 3 slices");
  }
  if (!(outlier_z > 0.0)) throw Error(ErrorKind::Domain, "outlier_z must be > 0");
  return {robust_line(fits, outlier_z, true), robust_line(fits, outlier_z, false)};
}

std::vector<double> estimate_autocorr(std::span<const std::vector<double>> per_period_counts,
                                      std::size_t max_lag) {
  if (max_lag < 1) throw Error(ErrorKind::Domain, "max_lag must be >= 1");

  // Fractional increases per article; NaN marks periods with nothing before them.
  std::vector<std::vector<double>> series;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& counts : per_period_counts) {
    if (counts.size() <= max_lag + 1) continue;
    std::vector<double> inc(counts.size(), std::numeric_limits<double>::quiet_NaN());
    double before = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (before > 0.0) {
        inc[k] = counts[k] / before;
        sum += inc[k];
        ++count;
      }
      before += counts[k];
    }
    series.push_back(std::move(inc));
  }
  if (count < 2) {
    throw Error(ErrorKind::InsufficientData,
                "estimate_autocorr: no sequence is longer than max_lag + 1");
  }
  const double mean = sum / static_cast<double>(count);

  double c0 = 0.0;
  for (const auto& s : series) {
    for (double v : s) {
      if (!std::isnan(v)) c0 += (v - mean) * (v - mean);
    }
  }
  c0 /= static_cast<double>(count);
  if (!(c0 > 1e-300)) {
    throw Error(ErrorKind::InsufficientData,
                "estimate_autocorr: fractional increases have zero variance");
  }

  std::vector<double> out;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    std::size_t pairs = 0;
    for (const auto& s : series) {
      for (std::size_t k = 0; k + lag < s.size(); ++k) {
        if (std::isnan(s[k]) || std::isnan(s[k + lag])) continue;
        c += (s[k] - mean) * (s[k + lag] - mean);
        ++pairs;
      }
    }
    out.push_back(pairs > 0 ? c / static_cast<double>(pairs) / c0
                            : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

void write_slice_fits(std::ostream& out, std::span<const Slice> slices,
                      std::span<const SliceFit> fits, std::string_view schema_comment) {
  if (slices.size() != fits.size()) {
    throw Error(ErrorKind::Domain, "write_slice_fits: slices and fits differ in length");
  }
  if (!schema_comment.empty()) out << "# " << schema_comment << '\n';
  out << "slice_id\tstart\tend\tmean_age\tn\tmu\tsigma2\tg\tdof\tp\n";
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& s = slices[i];
    const auto& f = fits[i];
    const bool ok = f.tested && f.testable;
    out << s.id << '\t' << format_double(s.start_time) << '\t' << format_double(s.end_time) << '\t'
        << format_double(s.mean_age) << '\t' << f.n_articles << '\t' << format_double(f.mu) << '\t'
        << format_double(f.sigma2) << '\t' << (ok ? format_double(f.g_statistic) : "NA") << '\t'
        << (ok ? std::to_string(f.dof) : "NA") << '\t' << (ok ? format_double(f.p_value) : "NA")
        << '\n';
  }
}

}  // namespace accrete
