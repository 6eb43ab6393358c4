#pragma once

// Bridges simulated corpora into the edit-log pipeline.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "accrete/ingest.hpp"
#include "accrete/process.hpp"

namespace accrete {

struct SerializeOptions {
  UnixSeconds epoch = 979516800;  // 2001-01-15T00:00:00Z, simulated time 0
  double time_unit_seconds = 86400.0;
  std::size_t editor_pool = 100000;
  std::uint64_t seed = 0;
};

std::string article_id_for(std::size_t index);

UnixSeconds to_unix(double time, const SerializeOptions& opts);

/// Expands full trajectories into individual edits. Edits are monotone: the
/// cumulative number of edits by step k is min(counts[k..n]), so the total
/// equals the final count.
/// Edits belonging to step interval [k*dt, (k+1)*dt) are spread evenly over it,
/// the first at the interval start; the first edit sits on the creation time.
/// Editors are drawn uniformly from the pool using per-article streams.
/// Output is ordered by (timestamp, article index, sequence).
std::vector<EditRecord> corpus_to_edits(std::span<const ArticleSeries> corpus,
                                        const SerializeOptions& opts);

/// Number of edits corpus_to_edits would produce.
std::size_t count_serialized_edits(std::span<const ArticleSeries> corpus);

struct PlantedEffect {
  double featured_fraction = 0.0;
  double featured_drift_multiplier = 1.0;
  int bucket_min = 1;
  int bucket_max = 7;
};

struct LabeledCorpus {
  std::vector<ArticleSeries> articles;
  std::vector<bool> featured;
  std::vector<int> bucket;
};

/// Like simulate_corpus, but each article is first labeled (featured with
/// probability featured_fraction, bucket uniform) from its own label stream;
/// featured articles grow with drift multiplied by featured_drift_multiplier.
LabeledCorpus simulate_labeled_corpus(const ProcessParams& params, const CorpusSpec& spec,
                                      const PlantedEffect& effect, Trajectory mode,
                                      unsigned threads = 1);

}  // namespace accrete
