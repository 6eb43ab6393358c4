#pragma once

// Age-normalized edit volume and featured-vs-other comparisons within
// visibility buckets.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "accrete/fitstats.hpp"
#include "accrete/timefmt.hpp"

namespace accrete {

struct Interval {
  UnixSeconds start = 0;  // inclusive
  UnixSeconds end = 0;    // exclusive
  bool operator==(const Interval&) const = default;
};

struct ArticleLabeling {
  std::string article_id;
  bool featured = false;
  int visibility_bucket = 0;
  std::vector<Interval> frontpage_windows;  // sorted, non-overlapping
};

struct BucketRange {
  int min = 1;
  int max = 10;
  bool contains(int b) const { return b >= min && b <= max; }
};

using LabelMap = std::unordered_map<std::string, ArticleLabeling>;

inline constexpr std::string_view kLabelingHeader = "article_id\tfeatured\tbucket\twindows";

/// Labeling TSV: header then `id  featured{0,1}  bucket  windows`, windows
/// being `start/end` ISO-8601 pairs separated by `;`. Throws Error(Format)
/// on the first bad line, on duplicate ids and on overlapping windows. Buckets
/// are kept as given; range filtering happens in group_stats.
LabelMap parse_labeling(std::istream& in);

void write_labeling(std::ostream& out, std::span<const ArticleLabeling> labels,
                    std::string_view schema_comment = {});

/// Edits outside every front-page window. The first edit always counts, so the
/// result is at least 1. `timestamps` must be sorted.
std::size_t discount_frontpage(std::span<const UnixSeconds> timestamps,
                               std::span<const Interval> windows);

/// Empirical mu/sigma2 by creation-time slice, with an optional linear trend
/// used outside the table's range.
class AgeTable {
 public:
  struct Row {
    double start_time;
    double end_time;
    double mean_age;
    double mu;
    double sigma2;
  };

  AgeTable(std::vector<Row> rows, double cutoff, std::optional<TrendPair> fallback = {});

  static AgeTable from_slices(std::span<const Slice> slices, std::span<const SliceFit> fits,
                              double cutoff, std::optional<TrendPair> fallback = {});

  struct Lookup {
    double mu;
    double sigma2;
    bool extrapolated;  // came from the trend fallback
  };

  /// Throws Error(Normalization) when the creation time is outside every row
  /// and no fallback is available, or when the resulting sigma2 <= 0.
  Lookup at(double creation_time) const;

  std::span<const Row> rows() const { return rows_; }

 private:
  std::vector<Row> rows_;  // sorted by start_time
  double cutoff_;
  std::optional<TrendPair> fallback_;
};

struct NormalizedScore {
  std::string article_id;
  double x = 0.0;
  double age = 0.0;
  double effective_edits = 0.0;
  bool extrapolated = false;
};

/// x = (log effective_edits - mu(t)) / sigma(t).
NormalizedScore normalize(const std::string& article_id, double creation_time,
                          double effective_edits, const AgeTable& table, double cutoff);

enum class Population { Featured, Other };
enum class Metric { LogEdits, LogEditors, NormalizedX };

std::string_view to_string(Population p);
std::string_view to_string(Metric m);

struct GroupStats {
  int bucket = 0;
  Population population = Population::Other;
  Metric metric = Metric::NormalizedX;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single article
  std::size_t n = 0;
};

struct ArticleValue {
  std::string article_id;
  double value;
};

/// Mean, standard deviation and count per (bucket, population), sorted by
/// bucket then featured before other. Articles in buckets outside `range` are
/// skipped; an article with no label throws Error(Labeling) listing up to 10
/// offenders.
std::vector<GroupStats> group_stats(std::span<const ArticleValue> values, const LabelMap& labels,
                                    Metric metric, const BucketRange& range = {});

/// Difference of means (featured - other) over its pooled standard error.
struct Separation {
  int bucket;
  double gap;
  double pooled_se;
};
std::vector<Separation> separations(std::span<const GroupStats> stats);

void write_group_stats(std::ostream& out, std::span<const GroupStats> stats,
                       std::string_view schema_comment = {});

}  // namespace accrete
