#include "accrete/ingest.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "accrete/error.hpp"

namespace accrete {
namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if ((c >> 5) == 0x6) len = 2;
    else if ((c >> 4) == 0xe) len = 3;
    else if ((c >> 3) == 0x1e) len = 4;
    else return false;
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

bool valid_id(std::string_view s) {
  return !s.empty() && valid_utf8(s) && s.find_first_of("\t\n") == std::string_view::npos;
}

bool parse_flags(std::string_view s, unsigned& flags) {
  flags = kNoFlags;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const std::string_view tok = s.substr(0, comma);
    if (tok == "redirect") flags |= kRedirect;
    else if (tok == "disambig") flags |= kDisambiguation;
    else if (!tok.empty()) return false;
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return true;
}

}  // namespace

bool parse_record(std::string_view line, EditRecord& out) {
  std::string_view fields[4];
  std::size_t n = 0;
  while (true) {
    const auto tab = line.find('\t');
    if (n == 4) return false;
    fields[n++] = line.substr(0, tab);
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  if (n < 3) return false;

  const auto ts = parse_iso8601(fields[2]);
  unsigned flags = kNoFlags;
  if (!valid_id(fields[0]) || !valid_id(fields[1]) || !ts) return false;
  if (n == 4 && !parse_flags(fields[3], flags)) return false;

  out.article_id.assign(fields[0]);
  out.editor_id.assign(fields[1]);
  out.timestamp = *ts;
  out.flags = flags;
  return true;
}

ParseStats for_each_record(std::istream& in, const std::function<void(EditRecord&&)>& sink) {
  ParseStats stats;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_cr(line);
    if (!have_header) {
      if (!view.empty() && view.front() == '#') continue;
      if (view != kEditLogHeader) {
        throw Error(ErrorKind::Format, "edit log: expected header '" +
                                           std::string(kEditLogHeader) + "' on line " +
                                           std::to_string(line_no));
      }
      have_header = true;
      continue;
    }
    if (view.empty()) continue;
    ++stats.data_lines;
    EditRecord rec;
    if (parse_record(view, rec)) {
      ++stats.records;
      sink(std::move(rec));
    } else {
      ++stats.malformed;
      if (stats.first_malformed_lines.size() < 10) stats.first_malformed_lines.push_back(line_no);
    }
  }
  if (!have_header) throw Error(ErrorKind::Format, "edit log: missing header line");
  if (stats.malformed * 10 > stats.data_lines) {
    std::ostringstream msg;
    msg << "edit log: " << stats.malformed << " of " << stats.data_lines
        << " lines are malformed (limit 10%); first at line "
        << stats.first_malformed_lines.front();
    throw Error(ErrorKind::CorruptInput, msg.str());
  }
  return stats;
}

ParsedLog parse_log(std::istream& in) {
  ParsedLog out;
  out.stats = for_each_record(in, [&](EditRecord&& r) { out.records.push_back(std::move(r)); });
  return out;
}

std::string format_flags(unsigned flags) {
  std::string s;
  if (flags & kRedirect) s += "redirect";
  if (flags & kDisambiguation) s += s.empty() ? "disambig" : ",disambig";
  return s;
}

void write_log(std::ostream& out, std::span<const EditRecord> records,
               std::string_view schema_comment) {
  if (!schema_comment.empty()) out << "# " << schema_comment << '\n';
  out << kEditLogHeader << '\n';
  for (const auto& r : records) {
    out << r.article_id << '\t' << r.editor_id << '\t' << format_iso8601(r.timestamp) << '\t'
        << format_flags(r.flags) << '\n';
  }
}

BotList parse_bot_list(std::istream& in) {
  BotList bots;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim_cr(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    while (!view.empty() && (view.back() == ' ' || view.back() == '\t')) view.remove_suffix(1);
    while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
    if (!view.empty()) bots.emplace(view);
  }
  return bots;
}

void BurstRule::validate() const {
  if (min_run < 2) throw Error(ErrorKind::Domain, "burst_k must be >= 2");
  if (max_gap <= 0) throw Error(ErrorKind::Domain, "burst_window must be > 0");
}

FilterResult filter_robots(std::vector<EditRecord> records, const BotList& bots,
                           const BurstRule& rule) {
  rule.validate();
  std::vector<char> drop(records.size(), 0);

  std::unordered_map<std::string_view, std::vector<std::size_t>> by_editor;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (bots.contains(records[i].editor_id)) {
      drop[i] = 1;
    } else {
      by_editor[records[i].editor_id].push_back(i);
    }
  }

  for (auto& [editor, idx] : by_editor) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return records[a].timestamp < records[b].timestamp;
    });
    std::size_t run_start = 0;
    for (std::size_t k = 1; k <= idx.size(); ++k) {
      const bool breaks =
          k == idx.size() ||
          records[idx[k]].timestamp - records[idx[k - 1]].timestamp > rule.max_gap;
      if (!breaks) continue;
      if (k - run_start >= rule.min_run) {
        for (std::size_t j = run_start; j < k; ++j) drop[idx[j]] = 1;
      }
      run_start = k;
    }
  }

  FilterResult out;
  out.kept.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (drop[i]) ++out.removed_edits;
    else out.kept.push_back(std::move(records[i]));
  }
  return out;
}

FilterResult filter_pages(std::vector<EditRecord> records) {
  std::unordered_set<std::string> flagged;
  for (const auto& r : records) {
    if (r.flags & (kRedirect | kDisambiguation)) flagged.insert(r.article_id);
  }
  FilterResult out;
  out.removed_articles = flagged.size();
  out.kept.reserve(records.size());
  for (auto& r : records) {
    if (flagged.contains(r.article_id)) ++out.removed_edits;
    else out.kept.push_back(std::move(r));
  }
  return out;
}

CleanedLog clean(std::vector<EditRecord> records, const BotList& bots, const BurstRule& rule) {
  CleanedLog out;
  out.report.total_edits = records.size();
  FilterResult pages = filter_pages(std::move(records));
  out.report.removed_redirect_edits = pages.removed_edits;
  out.report.removed_articles = pages.removed_articles;
  FilterResult robots = filter_robots(std::move(pages.kept), bots, rule);
  out.report.removed_robot_edits = robots.removed_edits;
  out.records = std::move(robots.kept);
  out.report.retained_edits = out.records.size();
  return out;
}

std::vector<ArticleRollup> rollup(std::span<const EditRecord> records, UnixSeconds period) {
  struct Acc {
    UnixSeconds first = 0;
    std::vector<UnixSeconds> times;
    std::unordered_set<std::string_view> editors;
  };
  std::unordered_map<std::string_view, Acc> groups;
  for (const auto& r : records) {
    auto [it, inserted] = groups.try_emplace(r.article_id);
    Acc& acc = it->second;
    if (inserted || r.timestamp < acc.first) acc.first = r.timestamp;
    acc.editors.insert(r.editor_id);
    if (period > 0) acc.times.push_back(r.timestamp);
    else acc.times.push_back(0);  // only the size is used
  }

  std::vector<ArticleRollup> out;
  out.reserve(groups.size());
  for (auto& [id, acc] : groups) {
    ArticleRollup roll;
    roll.article_id = std::string(id);
    roll.creation_time = acc.first;
    roll.edit_count = acc.times.size();
    roll.distinct_editors = acc.editors.size();
    if (period > 0) {
      const UnixSeconds last = *std::max_element(acc.times.begin(), acc.times.end());
      roll.per_period_counts.assign(static_cast<std::size_t>((last - acc.first) / period) + 1, 0);
      for (UnixSeconds t : acc.times) {
        ++roll.per_period_counts[static_cast<std::size_t>((t - acc.first) / period)];
      }
    }
    out.push_back(std::move(roll));
  }
  std::sort(out.begin(), out.end(),
            [](const ArticleRollup& a, const ArticleRollup& b) { return a.article_id < b.article_id; });
  return out;
}

}  // namespace accrete
