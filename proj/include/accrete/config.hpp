#pragma once

// Run configuration: a TOML-style file of `key = value` lines grouped under
// `[section]` headers. Strings may be quoted; `#` starts a comment. Unknown
// keys and out-of-domain values are rejected with Error(Config) naming the key.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "accrete/compare.hpp"
#include "accrete/fitstats.hpp"
#include "accrete/ingest.hpp"
#include "accrete/mixture.hpp"
#include "accrete/process.hpp"
#include "accrete/synth.hpp"

namespace accrete {

struct RunConfig {
  std::uint64_t seed = 1;
  unsigned threads = 1;

  // simulate
  ProcessParams process{0.01, 0.002, 0.0, 1.0, 20.0};
  CorpusSpec corpus{400.0, {RateModel::Kind::Constant, 20.0, 0.0}, 1, std::nullopt};
  SerializeOptions serialize{};
  PlantedEffect planted{};
  std::size_t max_edits = 20'000'000;

  // ingest
  BurstRule burst{};
  std::string bot_list;

  // fit (times in analysis units of time_unit_seconds)
  double time_unit_seconds = 86400.0;
  SliceOptions slicing{};
  GofOptions gof{};
  double outlier_z = 3.0;
  std::optional<UnixSeconds> cutoff;  // default: last retained edit
  std::size_t autocorr_max_lag = 5;
  double autocorr_period = 1.0;

  // mixture
  MixtureSpec mixture{0.02, 0.005, 500.0, 0.05, 1.0, 1.0, {}};
  double grid_n_min = 1.0;
  double grid_n_max = 1e6;
  std::size_t grid_points = 121;
  double tail_n_lo = 10.0;
  double tail_threshold = 0.1;

  // compare
  BucketRange buckets{};

  // paths
  std::filesystem::path out_dir = "out";
  std::string log_path;
  std::string labels_path;

  void validate() const;
};

using RawConfig = std::map<std::string, std::string>;

/// Parses the text into `section.key -> raw value`; throws Error(Config).
RawConfig parse_config_text(const std::string& text);

/// Applies raw values on top of defaults.
RunConfig config_from_raw(const RawConfig& raw, RunConfig base = {});

RunConfig load_config(const std::filesystem::path& path);

}  // namespace accrete
