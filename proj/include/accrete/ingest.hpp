#pragma once

// Edit-log parsing and cleaning.
//
// Log format (UTF-8, tab separated), after optional leading `#` lines:
//   article_id  editor_id  timestamp_iso8601  flags
// where flags is a comma-separated subset of {redirect, disambig} or empty.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "accrete/timefmt.hpp"

namespace accrete {

inline constexpr std::string_view kEditLogHeader =
    "article_id\teditor_id\ttimestamp_iso8601\tflags";

enum PageFlag : unsigned {
  kNoFlags = 0,
  kRedirect = 1u << 0,
  kDisambiguation = 1u << 1,
};

struct EditRecord {
  std::string article_id;
  std::string editor_id;
  UnixSeconds timestamp = 0;
  unsigned flags = kNoFlags;

  bool operator==(const EditRecord&) const = default;
};

struct ParseStats {
  std::size_t data_lines = 0;  // non-empty lines after the header
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::vector<std::size_t> first_malformed_lines;  // 1-based, at most 10
};

/// Streams records to `sink` one at a time; memory use does not grow with the
/// input. Malformed lines are counted and skipped. Throws Error(Format) when
/// the header is missing and Error(CorruptInput) when more than 10% of the
/// data lines are malformed (checked once the stream is exhausted).
ParseStats for_each_record(std::istream& in, const std::function<void(EditRecord&&)>& sink);

struct ParsedLog {
  std::vector<EditRecord> records;
  ParseStats stats;
};

ParsedLog parse_log(std::istream& in);

/// Parses one data line; nullopt-like false return for malformed input.
bool parse_record(std::string_view line, EditRecord& out);

std::string format_flags(unsigned flags);

/// Writes the header (optionally preceded by a schema comment) and records.
void write_log(std::ostream& out, std::span<const EditRecord> records,
               std::string_view schema_comment = {});

using BotList = std::unordered_set<std::string>;

/// One editor id per line; blank lines and `#` comments ignored.
BotList parse_bot_list(std::istream& in);

struct BurstRule {
  std::size_t min_run = 10;      // burst_k
  UnixSeconds max_gap = 5;       // burst_window, seconds
  void validate() const;
};

struct FilterResult {
  std::vector<EditRecord> kept;
  std::size_t removed_edits = 0;
  std::size_t removed_articles = 0;  // filter_pages only
};

/// Drops edits by listed editors and every edit in a run of >= min_run
/// consecutive edits (per editor, in time order) whose gaps are all
/// <= max_gap. Survivors keep their input order.
FilterResult filter_robots(std::vector<EditRecord> records, const BotList& bots,
                           const BurstRule& rule);

/// Drops every edit of an article that carries a redirect or disambiguation
/// flag on any of its records.
FilterResult filter_pages(std::vector<EditRecord> records);

struct CleaningReport {
  std::size_t total_edits = 0;
  std::size_t removed_robot_edits = 0;
  std::size_t removed_redirect_edits = 0;
  std::size_t removed_articles = 0;
  std::size_t retained_edits = 0;
};

struct CleanedLog {
  std::vector<EditRecord> records;
  CleaningReport report;
};

/// filter_pages followed by filter_robots.
CleanedLog clean(std::vector<EditRecord> records, const BotList& bots, const BurstRule& rule);

struct ArticleRollup {
  std::string article_id;
  UnixSeconds creation_time = 0;
  std::size_t edit_count = 0;
  std::size_t distinct_editors = 0;
  // Edits per consecutive period starting at creation_time, through the last
  // period that holds an edit. Empty when rolled up without a period.
  std::vector<std::size_t> per_period_counts;

  bool operator==(const ArticleRollup&) const = default;
};

/// Groups by article id; output sorted by article id. period <= 0 skips the
/// per-period counts.
std::vector<ArticleRollup> rollup(std::span<const EditRecord> records, UnixSeconds period = 0);

}  // namespace accrete
