#include "accrete/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "accrete/error.hpp"
#include "accrete/numerics.hpp"

namespace accrete {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string schema(std::string_view name) {
  return "schema: accrete." + std::string(name) + "/" + std::to_string(kSchemaVersion);
}

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
  write_atomic(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

// Prefixes module errors with the pipeline stage that raised them.
template <class F>
auto stage(std::string_view module, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(module) + ": " + e.what());
  }
}

std::ifstream open_input(const std::string& path, std::string_view what) {
  if (path.empty()) throw Error(ErrorKind::Config, std::string(what) + " path is not set");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + std::string(what) + " " + path);
  return in;
}

json trend_json(const TrendFit& t) {
  return json{{"slope", t.slope},
              {"intercept", t.intercept},
              {"r_squared", t.r_squared},
              {"n_used", t.n_used},
              {"excluded_slices", t.excluded_slices}};
}

json report_json(const CleaningReport& r) {
  return json{{"total_edits", r.total_edits},
              {"removed_robot_edits", r.removed_robot_edits},
              {"removed_redirect_edits", r.removed_redirect_edits},
              {"removed_articles", r.removed_articles},
              {"retained_edits", r.retained_edits}};
}

struct CleanInput {
  CleanedLog log;
  ParseStats stats;
};

CleanInput load_and_clean(const RunConfig& config) {
  CleanInput out;
  std::ifstream in = open_input(config.log_path, "edit log");
  ParsedLog parsed = stage("ingest", [&] { return parse_log(in); });
  out.stats = parsed.stats;
  BotList bots;
  if (!config.bot_list.empty()) {
    std::ifstream bl = open_input(config.bot_list, "bot list");
    bots = parse_bot_list(bl);
  }
  out.log = stage("ingest", [&] { return clean(std::move(parsed.records), bots, config.burst); });
  return out;
}

double analysis_cutoff(const RunConfig& config, std::span<const EditRecord> records) {
  UnixSeconds last = 0;
  for (const auto& r : records) last = std::max(last, r.timestamp);
  const UnixSeconds cutoff = config.cutoff.value_or(last);
  return static_cast<double>(cutoff) / config.time_unit_seconds;
}

struct SliceAnalysis {
  Slicing slicing;
  std::vector<SliceFit> fits;
  std::optional<TrendPair> trend;
};

SliceAnalysis analyze_slices(const RunConfig& config, std::vector<ArticleObservation> obs,
                             double cutoff) {
  SliceAnalysis out;
  SliceOptions opts = config.slicing;
  opts.cutoff = cutoff;
  out.slicing = stage("fitstats", [&] { return make_slices(std::move(obs), opts); });
  out.fits.resize(out.slicing.slices.size());
  stage("fitstats", [&] {
    for (std::size_t i = 0; i < out.fits.size(); ++i) {
      const Slice& s = out.slicing.slices[i];
      SliceFit f = fit_slice(s);
      out.fits[i] = f.sigma2 > 0.0 ? gof_test(s, f, config.gof) : f;
    }
  });
  if (out.fits.size() >= 3) {
    std::vector<AgedFit> aged;
    for (std::size_t i = 0; i < out.fits.size(); ++i) {
      aged.push_back({out.slicing.slices[i].id, out.slicing.slices[i].mean_age, out.fits[i]});
    }
    out.trend = stage("fitstats", [&] { return fit_trend(aged, config.outlier_z); });
  }
  return out;
}

}  // namespace

CommandResult cmd_simulate(const RunConfig& config) {
  config.validate();
  const LabeledCorpus corpus = stage("process_engine", [&] {
    return simulate_labeled_corpus(config.process, config.corpus, config.planted, Trajectory::Full,
                                   config.threads);
  });
  const std::size_t edits = count_serialized_edits(corpus.articles);
  if (edits > config.max_edits) {
    throw Error(ErrorKind::Config, "config key 'corpus.max_edits': corpus would produce " +
                                       std::to_string(edits) + " edits, limit is " +
                                       std::to_string(config.max_edits));
  }
  const std::vector<EditRecord> records =
      stage("process_engine", [&] { return corpus_to_edits(corpus.articles, config.serialize); });

  std::vector<ArticleLabeling> labels;
  labels.reserve(corpus.articles.size());
  std::size_t featured = 0;
  for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
    labels.push_back({article_id_for(corpus.articles[i].index), corpus.featured[i], corpus.bucket[i], {}});
    featured += corpus.featured[i] ? 1 : 0;
  }

  const fs::path dir = config.out_dir;
  CommandResult result;
  write_atomic(dir / "edits.tsv", [&](std::ostream& out) { write_log(out, records, schema("editlog")); });
  write_atomic(dir / "labels.tsv", [&](std::ostream& out) { write_labeling(out, labels, schema("labels")); });

  const UnixSeconds cutoff = to_unix(config.corpus.horizon, config.serialize);
  json truth{
      {"schema_version", kSchemaVersion},
      {"seed", config.seed},
      {"drift_a", config.process.drift_a},
      {"noise_var_s2", config.process.noise_var_s2},
      {"noise_autocorr_rho", config.process.noise_autocorr_rho},
      {"step_dt", config.process.step_dt},
      {"initial_edits_n0", config.process.initial_edits_n0},
      {"rate_model", config.corpus.rate.kind == RateModel::Kind::Constant ? "constant" : "exponential"},
      {"rate_r0", config.corpus.rate.r0},
      {"growth_g", config.corpus.rate.kind == RateModel::Kind::Constant ? 0.0 : config.corpus.rate.g},
      {"horizon", config.corpus.horizon},
      {"time_unit_seconds", config.serialize.time_unit_seconds},
      {"epoch", format_iso8601(config.serialize.epoch)},
      {"cutoff", format_iso8601(cutoff)},
      {"featured_fraction", config.planted.featured_fraction},
      {"featured_drift_multiplier", config.planted.featured_drift_multiplier},
      {"articles", corpus.articles.size()},
      {"featured_articles", featured},
      {"edits", records.size()},
  };
  write_json(dir / "truth.json", truth);
  result.outputs = {dir / "edits.tsv", dir / "labels.tsv", dir / "truth.json"};
  result.summary = truth;
  return result;
}

CommandResult cmd_fit(const RunConfig& config) {
  config.validate();
  CleanInput input = load_and_clean(config);
  const double cutoff = analysis_cutoff(config, input.log.records);
  const UnixSeconds period =
      static_cast<UnixSeconds>(std::llround(config.autocorr_period * config.time_unit_seconds));
  const std::vector<ArticleRollup> rollups = stage("ingest", [&] {
    return rollup(input.log.records, config.autocorr_max_lag > 0 ? period : 0);
  });
  input.log.records.clear();
  input.log.records.shrink_to_fit();

  SliceAnalysis analysis =
      analyze_slices(config, observations_from(rollups, config.time_unit_seconds), cutoff);

  std::size_t testable = 0, above_half = 0;
  for (const auto& f : analysis.fits) {
    if (f.tested && f.testable) {
      ++testable;
      if (f.p_value > 0.5) ++above_half;
    }
  }

  json autocorr = nullptr;
  if (config.autocorr_max_lag > 0) {
    std::vector<std::vector<double>> periods;
    periods.reserve(rollups.size());
    for (const auto& r : rollups) periods.emplace_back(r.per_period_counts.begin(), r.per_period_counts.end());
    try {
      autocorr = estimate_autocorr(periods, config.autocorr_max_lag);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
    }
  }

  const fs::path dir = config.out_dir;
  write_atomic(dir / "slices.tsv", [&](std::ostream& out) {
    write_slice_fits(out, analysis.slicing.slices, analysis.fits, schema("slicefit"));
  });

  json trend{
      {"schema_version", kSchemaVersion},
      {"parse", {{"data_lines", input.stats.data_lines},
                 {"records", input.stats.records},
                 {"malformed", input.stats.malformed}}},
      {"cleaning", report_json(input.log.report)},
      {"articles", rollups.size()},
      {"time_unit_seconds", config.time_unit_seconds},
      {"cutoff", format_iso8601(static_cast<UnixSeconds>(std::llround(cutoff * config.time_unit_seconds)))},
      {"slices", analysis.slicing.slices.size()},
      {"excluded_remainder", analysis.slicing.excluded_remainder},
      {"testable_slices", testable},
      {"fraction_p_above_half",
       testable > 0 ? json(static_cast<double>(above_half) / static_cast<double>(testable)) : json(nullptr)},
      {"mu_trend", analysis.trend ? trend_json(analysis.trend->mu) : json(nullptr)},
      {"sigma2_trend", analysis.trend ? trend_json(analysis.trend->sigma2) : json(nullptr)},
      {"autocorrelation", autocorr},
  };
  write_json(dir / "trend.json", trend);

  CommandResult result;
  result.outputs = {dir / "slices.tsv", dir / "trend.json"};
  result.summary = trend;
  return result;
}

CommandResult cmd_mixture(const RunConfig& config) {
  config.validate();
  const MixtureSpec& spec = config.mixture;
  const double mu_T = std::log(spec.n0) + spec.drift_a * spec.horizon_T;
  const double s2_T = spec.noise_var_s2 * spec.horizon_T;

  std::ostringstream table;
  table << "# " << schema("mixture") << '\n' << "n\tmixture_pdf\tlognormal_pdf_at_horizon\n";
  const double ratio = std::log(config.grid_n_max / config.grid_n_min) /
                       static_cast<double>(config.grid_points - 1);
  stage("mixture", [&] {
    for (std::size_t i = 0; i < config.grid_points; ++i) {
      const double n = config.grid_n_min * std::exp(ratio * static_cast<double>(i));
      table << format_double(n) << '\t' << format_double(mixture_pdf(n, spec)) << '\t'
            << format_double(lognormal_pdf(n, mu_T, s2_T)) << '\n';
    }
  });

  json tail{{"schema_version", kSchemaVersion},
            {"drift_a", spec.drift_a},
            {"noise_var_s2", spec.noise_var_s2},
            {"horizon_T", spec.horizon_T},
            {"growth_g", spec.growth_g},
            {"n0", spec.n0},
            {"age_floor", spec.age_floor}};
  const TailStability st =
      stage("mixture", [&] { return tail_stability(spec, config.tail_n_lo, config.tail_threshold); });
  tail["windows"] = json::array(
      {json{{"n_lo", config.tail_n_lo}, {"n_hi", 10 * config.tail_n_lo}, {"slope", st.lower.slope},
            {"r_squared", st.lower.r_squared}},
       json{{"n_lo", 10 * config.tail_n_lo}, {"n_hi", 100 * config.tail_n_lo}, {"slope", st.upper.slope},
            {"r_squared", st.upper.r_squared}}});
  tail["slope_change"] = st.slope_change;
  tail["threshold"] = config.tail_threshold;
  tail["classification"] = st.power_law_stable ? "power-law-stable" : "lognormal-curving";

  const fs::path dir = config.out_dir;
  write_atomic(dir / "mixture.tsv", [&](std::ostream& out) { out << table.str(); });
  write_json(dir / "tail.json", tail);

  CommandResult result;
  result.outputs = {dir / "mixture.tsv", dir / "tail.json"};
  result.summary = tail;
  return result;
}

CommandResult cmd_compare(const RunConfig& config) {
  config.validate();
  LabelMap labels;
  {
    std::ifstream in = open_input(config.labels_path, "labeling file");
    labels = stage("compare", [&] { return parse_labeling(in); });
  }
  CleanInput input = load_and_clean(config);
  const double cutoff = analysis_cutoff(config, input.log.records);

  // Timestamps are kept only for articles that have front-page windows.
  std::unordered_map<std::string, std::vector<UnixSeconds>> windowed;
  for (const auto& r : input.log.records) {
    const auto it = labels.find(r.article_id);
    if (it != labels.end() && !it->second.frontpage_windows.empty()) {
      windowed[r.article_id].push_back(r.timestamp);
    }
  }
  const std::vector<ArticleRollup> rollups = rollup(input.log.records);
  input.log.records.clear();
  input.log.records.shrink_to_fit();

  SliceAnalysis analysis =
      analyze_slices(config, observations_from(rollups, config.time_unit_seconds), cutoff);
  const AgeTable table =
      AgeTable::from_slices(analysis.slicing.slices, analysis.fits, cutoff, analysis.trend);

  std::vector<ArticleValue> log_edits, log_editors, xs;
  std::size_t extrapolated = 0, discounted_articles = 0, unnormalized = 0;
  stage("compare", [&] {
    for (const auto& r : rollups) {
      double effective = static_cast<double>(r.edit_count);
      if (auto it = windowed.find(r.article_id); it != windowed.end()) {
        std::sort(it->second.begin(), it->second.end());
        effective = static_cast<double>(
            discount_frontpage(it->second, labels.at(r.article_id).frontpage_windows));
        if (effective < static_cast<double>(r.edit_count)) ++discounted_articles;
      }
      const double created = static_cast<double>(r.creation_time) / config.time_unit_seconds;
      log_edits.push_back({r.article_id, std::log(effective)});
      log_editors.push_back({r.article_id, std::log(static_cast<double>(r.distinct_editors))});
      try {
        const NormalizedScore s = normalize(r.article_id, created, effective, table, cutoff);
        extrapolated += s.extrapolated ? 1 : 0;
        xs.push_back({r.article_id, s.x});
      } catch (const Error& e) {
        // Ages where neither the table nor its trend gives a usable variance.
        if (e.kind() != ErrorKind::Normalization) throw;
        ++unnormalized;
      }
    }
  });

  std::vector<GroupStats> stats;
  stage("compare", [&] {
    for (auto [metric, values] : {std::pair{Metric::LogEdits, &log_edits},
                                  std::pair{Metric::LogEditors, &log_editors},
                                  std::pair{Metric::NormalizedX, &xs}}) {
      auto g = group_stats(*values, labels, metric, config.buckets);
      stats.insert(stats.end(), g.begin(), g.end());
    }
  });

  std::vector<GroupStats> x_stats;
  for (const auto& g : stats) {
    if (g.metric == Metric::NormalizedX) x_stats.push_back(g);
  }
  json seps = json::array();
  for (const auto& s : separations(x_stats)) {
    seps.push_back({{"bucket", s.bucket},
                    {"gap", s.gap},
                    {"pooled_se", s.pooled_se},
                    {"z", s.pooled_se > 0 ? json(s.gap / s.pooled_se) : json(nullptr)}});
  }

  const fs::path dir = config.out_dir;
  write_atomic(dir / "groups.tsv", [&](std::ostream& out) { write_group_stats(out, stats, schema("groupstats")); });
  json summary{{"schema_version", kSchemaVersion},
               {"cleaning", report_json(input.log.report)},
               {"articles", rollups.size()},
               {"slices", analysis.slicing.slices.size()},
               {"extrapolated_scores", extrapolated},
               {"unnormalized_articles", unnormalized},
               {"discounted_articles", discounted_articles},
               {"normalized_x_separation", seps}};
  write_json(dir / "compare.json", summary);

  CommandResult result;
  result.outputs = {dir / "groups.tsv", dir / "compare.json"};
  result.summary = summary;
  return result;
}

}  // namespace accrete
