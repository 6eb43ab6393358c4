#pragma once

// Pipeline commands behind the `accrete` executable. Each reads only its
// config and input files and writes into config.out_dir atomically
// (temporary file, then rename).

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "accrete/config.hpp"

namespace accrete {

inline constexpr int kSchemaVersion = 1;

struct CommandResult {
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json summary;
};

/// edits.tsv, labels.tsv and truth.json (the generating parameters).
CommandResult cmd_simulate(const RunConfig& config);

/// slices.tsv and trend.json from config.log_path.
CommandResult cmd_fit(const RunConfig& config);

/// mixture.tsv (n, mixture density, lognormal density at the horizon) and tail.json.
CommandResult cmd_mixture(const RunConfig& config);

/// groups.tsv and compare.json from config.log_path and config.labels_path.
CommandResult cmd_compare(const RunConfig& config);

}  // namespace accrete
