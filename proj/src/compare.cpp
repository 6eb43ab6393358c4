#include "accrete/compare.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "accrete/error.hpp"
#include "accrete/numerics.hpp"

namespace accrete {
namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
  throw Error(ErrorKind::Format, "labeling line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

LabelMap parse_labeling(std::istream& in) {
  LabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (!have_header) {
      if (!view.empty() && view.front() == '#') continue;
      if (view != kLabelingHeader) bad_line(line_no, "expected header");
      have_header = true;
      continue;
    }
    if (view.empty()) continue;

    const auto fields = split(view, '\t');
    if (fields.size() < 3 || fields.size() > 4) bad_line(line_no, "expected 3 or 4 fields");
    ArticleLabeling label;
    label.article_id = std::string(fields[0]);
    if (label.article_id.empty()) bad_line(line_no, "empty article id");
    if (fields[1] == "1") label.featured = true;
    else if (fields[1] != "0") bad_line(line_no, "featured must be 0 or 1");
    const auto [ptr, ec] =
        std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), label.visibility_bucket);
    if (ec != std::errc{} || ptr != fields[2].data() + fields[2].size() || label.visibility_bucket < 0) {
      bad_line(line_no, "bucket must be a non-negative integer");
    }
    if (fields.size() == 4 && !fields[3].empty()) {
      for (std::string_view pair : split(fields[3], ';')) {
        const auto ends = split(pair, '/');
        if (ends.size() != 2) bad_line(line_no, "window must be start/end");
        const auto start = parse_iso8601(ends[0]);
        const auto end = parse_iso8601(ends[1]);
        if (!start || !end || !(*start < *end)) bad_line(line_no, "bad window '" + std::string(pair) + "'");
        label.frontpage_windows.push_back({*start, *end});
      }
      std::sort(label.frontpage_windows.begin(), label.frontpage_windows.end(),
                [](const Interval& a, const Interval& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < label.frontpage_windows.size(); ++i) {
        if (label.frontpage_windows[i].start < label.frontpage_windows[i - 1].end) {
          bad_line(line_no, "overlapping windows");
        }
      }
    }
    const std::string id = label.article_id;
    if (!labels.emplace(id, std::move(label)).second) bad_line(line_no, "duplicate article id");
  }
  if (!have_header) throw Error(ErrorKind::Format, "labeling: missing header line");
  return labels;
}

void write_labeling(std::ostream& out, std::span<const ArticleLabeling> labels,
                    std::string_view schema_comment) {
  if (!schema_comment.empty()) out << "# " << schema_comment << '\n';
  out << kLabelingHeader << '\n';
  for (const auto& l : labels) {
    out << l.article_id << '\t' << (l.featured ? 1 : 0) << '\t' << l.visibility_bucket << '\t';
    for (std::size_t i = 0; i < l.frontpage_windows.size(); ++i) {
      if (i) out << ';';
      out << format_iso8601(l.frontpage_windows[i].start) << '/'
          << format_iso8601(l.frontpage_windows[i].end);
    }
    out << '\n';
  }
}

std::size_t discount_frontpage(std::span<const UnixSeconds> timestamps,
                               std::span<const Interval> windows) {
  if (timestamps.empty()) return 0;
  std::size_t discounted = 0;
  for (const auto& w : windows) {
    // Index 0 is the creation edit and is never discounted.
    const auto lo = std::lower_bound(timestamps.begin() + 1, timestamps.end(), w.start);
    const auto hi = std::lower_bound(lo, timestamps.end(), w.end);
    discounted += static_cast<std::size_t>(hi - lo);
  }
  return timestamps.size() - discounted;
}

AgeTable::AgeTable(std::vector<Row> rows, double cutoff, std::optional<TrendPair> fallback)
    : rows_(std::move(rows)), cutoff_(cutoff), fallback_(std::move(fallback)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const Row& a, const Row& b) { return a.start_time < b.start_time; });
}

AgeTable AgeTable::from_slices(std::span<const Slice> slices, std::span<const SliceFit> fits,
                               double cutoff, std::optional<TrendPair> fallback) {
  if (slices.size() != fits.size()) {
    throw Error(ErrorKind::Domain, "AgeTable: slices and fits differ in length");
  }
  std::vector<Row> rows;
  rows.reserve(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    rows.push_back({slices[i].start_time, slices[i].end_time, slices[i].mean_age, fits[i].mu,
                    fits[i].sigma2});
  }
  return AgeTable(std::move(rows), cutoff, std::move(fallback));
}

AgeTable::Lookup AgeTable::at(double creation_time) const {
  auto it = std::upper_bound(rows_.begin(), rows_.end(), creation_time,
                             [](double t, const Row& r) { return t < r.start_time; });
  if (it != rows_.begin()) {
    const Row& row = *std::prev(it);
    if (creation_time < row.end_time) {
      if (!(row.sigma2 > 0.0)) {
        throw Error(ErrorKind::Normalization, "slice sigma2 is zero at this age");
      }
      return {row.mu, row.sigma2, false};
    }
  }
  if (!fallback_) {
    std::ostringstream msg;
    msg << "creation time " << creation_time << " lies outside the age table";
    throw Error(ErrorKind::Normalization, msg.str());
  }
  const double age = cutoff_ - creation_time;
  const double mu = fallback_->mu.intercept + fallback_->mu.slope * age;
  const double sigma2 = fallback_->sigma2.intercept + fallback_->sigma2.slope * age;
  if (!(sigma2 > 0.0)) {
    std::ostringstream msg;
    msg << "trend sigma2 is not positive at age " << age;
    throw Error(ErrorKind::Normalization, msg.str());
  }
  return {mu, sigma2, true};
}

NormalizedScore normalize(const std::string& article_id, double creation_time,
                          double effective_edits, const AgeTable& table, double cutoff) {
  if (!(effective_edits > 0.0)) {
    throw Error(ErrorKind::Domain, "normalize: effective edits must be positive");
  }
  const AgeTable::Lookup ref = table.at(creation_time);
  NormalizedScore s;
  s.article_id = article_id;
  s.age = cutoff - creation_time;
  s.effective_edits = effective_edits;
  s.extrapolated = ref.extrapolated;
  s.x = (std::log(effective_edits) - ref.mu) / std::sqrt(ref.sigma2);
  return s;
}

std::string_view to_string(Population p) {
  return p == Population::Featured ? "featured" : "other";
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::LogEdits: return "log_edits";
    case Metric::LogEditors: return "log_editors";
    case Metric::NormalizedX: return "normalized_x";
  }
  return "?";
}

std::vector<GroupStats> group_stats(std::span<const ArticleValue> values, const LabelMap& labels,
                                    Metric metric, const BucketRange& range) {
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  // (bucket, featured-first) -> values
  std::map<std::pair<int, int>, std::vector<double>> cells;
  for (const auto& v : values) {
    const auto it = labels.find(v.article_id);
    if (it == labels.end()) {
      ++missing_count;
      if (missing.size() < 10) missing.push_back(v.article_id);
      continue;
    }
    const ArticleLabeling& l = it->second;
    if (!range.contains(l.visibility_bucket)) continue;
    cells[{l.visibility_bucket, l.featured ? 0 : 1}].push_back(v.value);
  }
  if (missing_count > 0) {
    std::ostringstream msg;
    msg << missing_count << " article(s) have no label:";
    for (const auto& id : missing) msg << ' ' << id;
    throw Error(ErrorKind::Labeling, msg.str());
  }

  std::vector<GroupStats> out;
  for (const auto& [key, xs] : cells) {
    GroupStats g;
    g.bucket = key.first;
    g.population = key.second == 0 ? Population::Featured : Population::Other;
    g.metric = metric;
    g.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    g.mean = sum / static_cast<double>(g.n);
    if (g.n > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - g.mean) * (x - g.mean);
      g.std = std::sqrt(ss / static_cast<double>(g.n - 1));
    }
    out.push_back(g);
  }
  return out;
}

std::vector<Separation> separations(std::span<const GroupStats> stats) {
  std::map<int, std::pair<const GroupStats*, const GroupStats*>> by_bucket;
  for (const auto& g : stats) {
    auto& slot = by_bucket[g.bucket];
    (g.population == Population::Featured ? slot.first : slot.second) = &g;
  }
  std::vector<Separation> out;
  for (const auto& [bucket, pair] : by_bucket) {
    const auto* f = pair.first;
    const auto* o = pair.second;
    if (!f || !o || f->n + o->n < 3) continue;
    const double nf = static_cast<double>(f->n), no = static_cast<double>(o->n);
    const double pooled_var =
        ((nf - 1.0) * f->std * f->std + (no - 1.0) * o->std * o->std) / (nf + no - 2.0);
    out.push_back({bucket, f->mean - o->mean, std::sqrt(pooled_var * (1.0 / nf + 1.0 / no))});
  }
  return out;
}

void write_group_stats(std::ostream& out, std::span<const GroupStats> stats,
                       std::string_view schema_comment) {
  if (!schema_comment.empty()) out << "# " << schema_comment << '\n';
  out << "bucket\tpopulation\tmetric\tmean\tstd\tn\n";
  for (const auto& g : stats) {
    out << g.bucket << '\t' << to_string(g.population) << '\t' << to_string(g.metric) << '\t'
        << format_double(g.mean) << '\t' << format_double(g.std) << '\t' << g.n << '\n';
  }
}

}  // namespace accrete
