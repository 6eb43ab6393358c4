#include "accrete/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "accrete/error.hpp"
#include "accrete/parallel.hpp"

namespace accrete {
namespace {

UnixSeconds step_seconds(const ArticleSeries& a, const SerializeOptions& opts) {
  const auto dt = static_cast<UnixSeconds>(std::llround(a.step_dt * opts.time_unit_seconds));
  if (dt < 1) throw Error(ErrorKind::Domain, "serialize: one step is shorter than a second");
  return dt;
}

void require_full(const ArticleSeries& a) {
  if (a.counts.size() != a.n_steps + 1) {
    throw Error(ErrorKind::Domain, "serialize: article " + article_id_for(a.index) +
                                       " was simulated without its full trajectory");
  }
}

// Cumulative edits at each step: the suffix minimum of the counts, the largest
// non-decreasing sequence that never exceeds them. It ends on the final count.
std::vector<std::int64_t> edit_envelope(const ArticleSeries& a) {
  std::vector<std::int64_t> env(a.counts);
  for (std::size_t k = env.size() - 1; k-- > 0;) env[k] = std::min(env[k], env[k + 1]);
  return env;
}

}  // namespace

std::string article_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%07zu", index);
  return buf;
}

UnixSeconds to_unix(double time, const SerializeOptions& opts) {
  return opts.epoch + static_cast<UnixSeconds>(std::floor(time * opts.time_unit_seconds));
}

std::size_t count_serialized_edits(std::span<const ArticleSeries> corpus) {
  std::size_t total = 0;
  for (const auto& a : corpus) total += static_cast<std::size_t>(a.final_count());
  return total;
}

std::vector<EditRecord> corpus_to_edits(std::span<const ArticleSeries> corpus,
                                        const SerializeOptions& opts) {
  if (opts.editor_pool == 0) throw Error(ErrorKind::Domain, "serialize: editor_pool must be > 0");

  struct Keyed {
    UnixSeconds ts;
    std::size_t article;
    std::size_t seq;
    std::uint32_t editor;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(count_serialized_edits(corpus));

  for (const auto& a : corpus) {
    require_full(a);
    const UnixSeconds dt = step_seconds(a, opts);
    const UnixSeconds created = to_unix(a.creation_time, opts);
    Rng rng = make_stream(opts.seed, kEditorStream + a.index);
    std::uniform_int_distribution<std::uint32_t> pick(
        0, static_cast<std::uint32_t>(opts.editor_pool - 1));

    const std::vector<std::int64_t> env = edit_envelope(a);
    std::size_t seq = 0;
    const std::size_t intervals = std::max<std::size_t>(a.n_steps, 1);
    for (std::size_t k = 0; k < intervals; ++k) {
      // Interval k ends at step k + 1; the first one also holds the initial edits.
      const std::size_t end = std::min(k + 1, a.n_steps);
      const std::int64_t m = k == 0 ? env[end] : env[end] - env[k];
      const UnixSeconds start = created + static_cast<UnixSeconds>(k) * dt;
      // An article younger than one step keeps its initial edits at creation.
      const UnixSeconds span = a.n_steps == 0 ? 0 : dt;
      for (std::int64_t j = 0; j < m; ++j) {
        keyed.push_back({start + j * span / m, a.index, seq++, pick(rng)});
      }
    }
  }

  std::sort(keyed.begin(), keyed.end(), [](const Keyed& x, const Keyed& y) {
    return std::tie(x.ts, x.article, x.seq) < std::tie(y.ts, y.article, y.seq);
  });

  std::vector<EditRecord> out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) {
    out.push_back({article_id_for(k.article), "u" + std::to_string(k.editor), k.ts, kNoFlags});
  }
  return out;
}

LabeledCorpus simulate_labeled_corpus(const ProcessParams& params, const CorpusSpec& spec,
                                      const PlantedEffect& effect, Trajectory mode,
                                      unsigned threads) {
  params.validate();
  spec.validate();
  if (!(effect.featured_fraction >= 0.0 && effect.featured_fraction <= 1.0)) {
    throw Error(ErrorKind::Domain, "featured_fraction must be in [0, 1]");
  }
  if (effect.bucket_min > effect.bucket_max) {
    throw Error(ErrorKind::Domain, "bucket_min must not exceed bucket_max");
  }
  if (spec.horizon < params.step_dt) {
    throw Error(ErrorKind::DegenerateCorpus, "horizon is shorter than one step");
  }
  ProcessParams featured_params = params;
  featured_params.drift_a = params.drift_a * effect.featured_drift_multiplier;
  featured_params.validate();

  const std::vector<double> times = draw_creation_times(spec);
  LabeledCorpus out;
  out.articles.resize(times.size());
  out.featured.resize(times.size());
  out.bucket.resize(times.size());
  // std::vector<bool> packs bits, so labels go through plain buffers first.
  std::vector<char> featured(times.size(), 0);
  parallel_for(times.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng label_rng = make_stream(spec.seed, kLabelStream + i);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::uniform_int_distribution<int> bucket(effect.bucket_min, effect.bucket_max);
      featured[i] = unit(label_rng) < effect.featured_fraction ? 1 : 0;
      out.bucket[i] = bucket(label_rng);

      const auto steps =
          static_cast<std::size_t>(std::floor((spec.horizon - times[i]) / params.step_dt));
      Rng rng = make_stream(spec.seed, kArticleStream + i);
      out.articles[i] =
          simulate_article(featured[i] ? featured_params : params, steps, rng, mode);
      out.articles[i].index = i;
      out.articles[i].creation_time = times[i];
    }
  });
  for (std::size_t i = 0; i < times.size(); ++i) out.featured[i] = featured[i] != 0;
  return out;
}

}  // namespace accrete
