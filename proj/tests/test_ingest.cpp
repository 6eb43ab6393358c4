#include <gtest/gtest.h>

#include <sys/resource.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <streambuf>

#include "accrete/error.hpp"
#include "accrete/ingest.hpp"
#include "accrete/process.hpp"
#include "accrete/synth.hpp"
#include "accrete/timefmt.hpp"
#include "ingest_oracles.hpp"

using namespace accrete;
using oracle::as_set;
using oracle::brute_force_burst_removals;
using oracle::naive_rollup;
using oracle::random_records;

namespace {

std::string header() { return std::string(kEditLogHeader) + "\n"; }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

}  // namespace

TEST(Timefmt, ParsesAndFormats) {
  EXPECT_EQ(parse_iso8601("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_iso8601("2001-01-15T00:00:00Z"), 979516800);
  EXPECT_EQ(parse_iso8601("2001-01-15 00:00:00"), 979516800);
  EXPECT_EQ(parse_iso8601("2001-01-15T02:00:00+02:00"), 979516800);
  EXPECT_EQ(parse_iso8601("2001-01-14T22:30:00-01:30"), 979516800);
  EXPECT_FALSE(parse_iso8601("2001-02-30T00:00:00Z"));
  EXPECT_FALSE(parse_iso8601("2001-01-15T24:00:00Z"));
  EXPECT_FALSE(parse_iso8601("2001-01-15"));
  EXPECT_FALSE(parse_iso8601("yesterday"));
  EXPECT_EQ(format_iso8601(979516800), "2001-01-15T00:00:00Z");
  for (UnixSeconds t : {UnixSeconds{0}, UnixSeconds{951782400}, UnixSeconds{1234567890}}) {
    EXPECT_EQ(parse_iso8601(format_iso8601(t)), t);
  }
}

TEST(ParseLog, ThreeLinesInOrder) {
  std::istringstream in(header() +
                        "Foo\talice\t2004-03-01T10:00:00Z\t\n"
                        "Bar\tbob\t2004-03-01T09:00:00Z\tredirect\n"
                        "Foo\t10.0.0.1\t2004-03-02T00:00:00Z\n");
  const ParsedLog log = parse_log(in);
  ASSERT_EQ(log.records.size(), 3u);
  EXPECT_EQ(log.records[0].article_id, "Foo");
  EXPECT_EQ(log.records[1].flags, kRedirect);
  EXPECT_EQ(log.records[2].editor_id, "10.0.0.1");
  EXPECT_EQ(log.stats.malformed, 0u);
}

TEST(ParseLog, OneMalformedAmongHundred) {
  std::string text = header();
  for (int i = 0; i < 100; ++i) {
    text += i == 42 ? "broken line without tabs\n"
                    : "A" + std::to_string(i) + "\tu\t2005-01-01T00:00:00Z\t\n";
  }
  std::istringstream in(text);
  const ParsedLog log = parse_log(in);
  EXPECT_EQ(log.records.size(), 99u);
  EXPECT_EQ(log.stats.malformed, 1u);
  ASSERT_EQ(log.stats.first_malformed_lines.size(), 1u);
  EXPECT_EQ(log.stats.first_malformed_lines[0], 44u);
}

TEST(ParseLog, MalformedKinds) {
  EditRecord r;
  EXPECT_FALSE(parse_record("a\tb", r));
  EXPECT_FALSE(parse_record("a\tb\tnot-a-time\t", r));
  EXPECT_FALSE(parse_record("\tb\t2005-01-01T00:00:00Z\t", r));
  EXPECT_FALSE(parse_record("a\tb\t2005-01-01T00:00:00Z\tstub", r));
  EXPECT_FALSE(parse_record("a\tb\t2005-01-01T00:00:00Z\t\textra", r));
  EXPECT_FALSE(parse_record("caf\xc3\tb\t2005-01-01T00:00:00Z\t", r));
  EXPECT_TRUE(parse_record("caf\xc3\xa9\tb\t2005-01-01T00:00:00Z\tdisambig,redirect", r));
  EXPECT_EQ(r.flags, kRedirect | kDisambiguation);
}

TEST(ParseLog, HeaderAndCorruption) {
  std::istringstream no_header("Foo\talice\t2004-03-01T10:00:00Z\t\n");
  EXPECT_EQ(kind_of([&] { parse_log(no_header); }), ErrorKind::Format);
  std::istringstream empty("");
  EXPECT_EQ(kind_of([&] { parse_log(empty); }), ErrorKind::Format);

  std::string text = header();
  for (int i = 0; i < 20; ++i) text += i < 3 ? "junk\n" : "A\tu\t2005-01-01T00:00:00Z\t\n";
  std::istringstream corrupt(text);
  EXPECT_EQ(kind_of([&] { parse_log(corrupt); }), ErrorKind::CorruptInput);

  std::istringstream comments("# schema: x/1\n# more\n" + header() + "A\tu\t2005-01-01T00:00:00Z\t\r\n");
  EXPECT_EQ(parse_log(comments).records.size(), 1u);
}

// An input stream that synthesizes lines on demand, so nothing but the parser
// holds the data.
class GeneratedLog : public std::streambuf {
 public:
  explicit GeneratedLog(std::size_t lines) : remaining_(lines) {
    buffer_ = std::string(kEditLogHeader) + "\n";
    setg(buffer_.data(), buffer_.data(), buffer_.data() + buffer_.size());
  }

 protected:
  int_type underflow() override {
    if (remaining_ == 0) return traits_type::eof();
    buffer_.clear();
    for (int i = 0; i < 1000 && remaining_ > 0; ++i, --remaining_) {
      buffer_ += "article" + std::to_string(remaining_ % 5000) + "\teditor" +
                 std::to_string(remaining_ % 777) + "\t2006-05-01T12:00:00Z\t\n";
    }
    setg(buffer_.data(), buffer_.data(), buffer_.data() + buffer_.size());
    return traits_type::to_int_type(buffer_[0]);
  }

 private:
  std::size_t remaining_;
  std::string buffer_;
};

long max_rss_kb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

TEST(ParseLog, StreamingMemoryIsBounded) {
  GeneratedLog src(3'000'000);  // about 150 MB of text
  std::istream in(&src);
  const long before = max_rss_kb();
  std::size_t seen = 0;
  const ParseStats stats = for_each_record(in, [&](EditRecord&&) { ++seen; });
  EXPECT_EQ(seen, 3'000'000u);
  EXPECT_EQ(stats.records, seen);
  EXPECT_LT(max_rss_kb() - before, 32 * 1024);
}

TEST(FilterRobots, IdentityWithoutBotsOrBursts) {
  std::vector<EditRecord> in;
  for (int i = 0; i < 50; ++i) in.push_back({"A", "u" + std::to_string(i % 3), 1000 + 60 * i, 0});
  const FilterResult r = filter_robots(in, {}, {});
  EXPECT_EQ(r.kept, in);
  EXPECT_EQ(r.removed_edits, 0u);
}

TEST(FilterRobots, TwentyQuickEditsAllRemoved) {
  std::vector<EditRecord> in;
  for (int i = 0; i < 20; ++i) in.push_back({"A" + std::to_string(i), "fast", 5000 + 3 * i, 0});
  in.push_back({"B", "human", 5001, 0});
  const FilterResult r = filter_robots(in, {}, BurstRule{10, 5});
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].editor_id, "human");
  EXPECT_EQ(r.removed_edits, 20u);
}

TEST(FilterRobots, RunBelowThresholdSurvives) {
  std::vector<EditRecord> in;
  for (int i = 0; i < 9; ++i) in.push_back({"A", "quick", 100 + 5 * i, 0});
  EXPECT_EQ(filter_robots(in, {}, BurstRule{10, 5}).kept.size(), 9u);
  in.push_back({"A", "quick", 100 + 5 * 9, 0});
  EXPECT_EQ(filter_robots(in, {}, BurstRule{10, 5}).kept.size(), 0u);
}

TEST(FilterRobots, BotListRemovesEverything) {
  std::istringstream list("# bots\nbotA\n\n  botB  \n");
  const BotList bots = parse_bot_list(list);
  EXPECT_EQ(bots.size(), 2u);
  std::vector<EditRecord> in = {{"A", "botA", 1, 0}, {"A", "x", 2, 0}, {"B", "botB", 1000, 0}};
  const FilterResult r = filter_robots(in, bots, {});
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].editor_id, "x");
}

TEST(FilterRobots, MatchesBruteForceOnRandomStream) {
  const auto records = random_records(20000, 200, 500, 8);
  const BurstRule rule{6, 4};
  const FilterResult r = filter_robots(records, {}, rule);
  const auto expected_removed = brute_force_burst_removals(records, rule);
  ASSERT_GT(expected_removed.size(), 100u);
  EXPECT_EQ(r.removed_edits, expected_removed.size());
  auto expected_kept = as_set(records);
  for (const auto& t : expected_removed) expected_kept.erase(expected_kept.find(t));
  EXPECT_EQ(as_set(r.kept), expected_kept);
}

TEST(FilterRobots, StableAndIdempotent) {
  const auto records = random_records(5000, 50, 100, 9);
  const FilterResult once = filter_robots(records, {}, BurstRule{5, 3});
  // Survivors keep input order: they form a subsequence of the input.
  std::size_t j = 0;
  for (const auto& r : records) {
    if (j < once.kept.size() && r == once.kept[j]) ++j;
  }
  EXPECT_EQ(j, once.kept.size());
  const FilterResult twice = filter_robots(once.kept, {}, BurstRule{5, 3});
  EXPECT_EQ(twice.kept, once.kept);
}

TEST(BurstRule, Validation) {
  EXPECT_THROW((BurstRule{1, 5}.validate()), Error);
  EXPECT_THROW((BurstRule{10, 0}.validate()), Error);
  EXPECT_THROW(filter_robots({}, {}, BurstRule{1, 5}), Error);
}

TEST(FilterPages, Cases) {
  std::vector<EditRecord> clean_in = {{"A", "u", 1, 0}, {"B", "v", 2, 0}};
  EXPECT_EQ(filter_pages(clean_in).kept, clean_in);

  std::vector<EditRecord> all = {{"A", "u", 1, kRedirect}, {"B", "v", 2, kDisambiguation}, {"A", "w", 3, 0}};
  const FilterResult r = filter_pages(all);
  EXPECT_TRUE(r.kept.empty());
  EXPECT_EQ(r.removed_articles, 2u);
  EXPECT_EQ(r.removed_edits, 3u);
}

TEST(FilterPages, MatchesSetDifference) {
  auto records = random_records(10000, 100, 300, 10);
  std::mt19937_64 rng(3);
  std::set<std::string> flagged;
  for (auto& r : records) {
    if (rng() % 97 == 0) {
      r.flags = rng() % 2 ? kRedirect : kDisambiguation;
      flagged.insert(r.article_id);
    }
  }
  std::vector<EditRecord> expected;
  for (const auto& r : records) {
    if (!flagged.count(r.article_id)) expected.push_back(r);
  }
  const FilterResult got = filter_pages(records);
  EXPECT_EQ(got.kept, expected);
  EXPECT_EQ(got.removed_articles, flagged.size());
  EXPECT_EQ(filter_pages(got.kept).kept, got.kept);
}

TEST(Clean, ReportReconciles) {
  auto records = random_records(20000, 150, 400, 11);
  records[7].flags = kRedirect;
  BotList bots = {"ed3", "ed4"};
  const CleanedLog c = clean(records, bots, BurstRule{6, 4});
  const CleaningReport& rep = c.report;
  EXPECT_EQ(rep.total_edits, records.size());
  EXPECT_GT(rep.removed_robot_edits, 0u);
  EXPECT_GT(rep.removed_redirect_edits, 0u);
  EXPECT_EQ(rep.removed_articles, 1u);
  EXPECT_EQ(rep.retained_edits, rep.total_edits - rep.removed_robot_edits - rep.removed_redirect_edits);
  EXPECT_EQ(rep.retained_edits, c.records.size());
}

TEST(Rollup, WorkedExamples) {
  std::vector<EditRecord> r = {{"A", "x", 10, 0}, {"A", "y", 11, 0}, {"A", "x", 12, 0},
                               {"A", "z", 13, 0}, {"A", "y", 14, 0}};
  auto out = rollup(r);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].edit_count, 5u);
  EXPECT_EQ(out[0].distinct_editors, 3u);
  EXPECT_EQ(out[0].creation_time, 10);
  EXPECT_TRUE(out[0].per_period_counts.empty());

  std::vector<EditRecord> t = {{"B", "x", 0, 0}, {"B", "x", 1, 0}, {"B", "x", 2, 0}};
  EXPECT_EQ(rollup(t, 1)[0].per_period_counts, (std::vector<std::size_t>{1, 1, 1}));
}

TEST(Rollup, MatchesNaiveGroupingAndIgnoresOrder) {
  auto records = random_records(30000, 300, 700, 12);
  const auto expected = naive_rollup(records, 3600);
  const auto got = rollup(records, 3600);
  ASSERT_EQ(got.size(), expected.size());
  for (const auto& a : got) {
    EXPECT_EQ(a, expected.at(a.article_id));
    EXPECT_GE(a.edit_count, a.distinct_editors);
    EXPECT_GE(a.distinct_editors, 1u);
  }
  std::mt19937_64 rng(1);
  std::shuffle(records.begin(), records.end(), rng);
  EXPECT_EQ(rollup(records, 3600), got);
}

TEST(RoundTrip, SimulateSerializeParseIsLossless) {
  ProcessParams p;
  p.drift_a = 0.01;
  p.noise_var_s2 = 0.004;
  p.initial_edits_n0 = 3.0;
  CorpusSpec s;
  s.horizon = 120.0;
  s.rate = {RateModel::Kind::Constant, 4.0, 0.0};
  s.seed = 21;
  const auto corpus = simulate_corpus(p, s);
  SerializeOptions opts;
  opts.seed = 21;
  const auto records = corpus_to_edits(corpus, opts);
  EXPECT_EQ(records.size(), count_serialized_edits(corpus));

  std::stringstream buf;
  write_log(buf, records, "schema: test/1");
  const ParsedLog parsed = parse_log(buf);
  EXPECT_EQ(parsed.records, records);
  EXPECT_EQ(rollup(parsed.records, 86400), rollup(records, 86400));

  // Edit totals equal the simulated final counts.
  const auto rolled = rollup(parsed.records);
  ASSERT_EQ(rolled.size(), corpus.size());
  for (const auto& a : corpus) {
    const auto it = std::find_if(rolled.begin(), rolled.end(),
                                 [&](const ArticleRollup& r) { return r.article_id == article_id_for(a.index); });
    ASSERT_NE(it, rolled.end());
    EXPECT_EQ(static_cast<std::int64_t>(it->edit_count), a.final_count());
    EXPECT_EQ(it->creation_time, to_unix(a.creation_time, opts));
  }
}

TEST(RoundTrip, SerializedCumulativeCountsNeverDecrease) {
  ProcessParams p;
  p.drift_a = 0.0;
  p.noise_var_s2 = 0.05;
  p.initial_edits_n0 = 20.0;
  const ArticleSeries a = simulate_article(p, 60, 5);
  const auto records = corpus_to_edits(std::span(&a, 1), {});
  const auto rolled = rollup(records, 86400);
  ASSERT_EQ(rolled.size(), 1u);
  // Oracle: cumulative edits by the end of period k are min(counts[k+1..n]).
  std::int64_t cumulative = 0;
  ASSERT_LE(rolled[0].per_period_counts.size(), a.n_steps);
  for (std::size_t k = 0; k < a.n_steps; ++k) {
    if (k < rolled[0].per_period_counts.size()) {
      cumulative += static_cast<std::int64_t>(rolled[0].per_period_counts[k]);
    }
    const std::int64_t floor_ahead = *std::min_element(a.counts.begin() + static_cast<std::ptrdiff_t>(k + 1), a.counts.end());
    EXPECT_EQ(cumulative, floor_ahead) << k;
    EXPECT_LE(cumulative, a.counts[k + 1]);
  }
  EXPECT_EQ(cumulative, a.final_count());
}
