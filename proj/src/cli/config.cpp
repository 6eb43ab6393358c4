#include "accrete/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "accrete/error.hpp"

namespace accrete {
namespace {

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::Config, "config key '" + key + "': " + why);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double as_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) fail(key, "expected a number, got '" + v + "'");
  return out;
}

std::uint64_t as_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

int as_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
  return out;
}

UnixSeconds as_time(const std::string& key, const std::string& v) {
  const auto t = parse_iso8601(v);
  if (!t) fail(key, "expected an ISO-8601 timestamp, got '" + v + "'");
  return *t;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = as_uint(k, v); }},
      {"threads", [](RunConfig& c, auto& k, auto& v) { c.threads = static_cast<unsigned>(as_uint(k, v)); }},

      {"process.drift_a", [](RunConfig& c, auto& k, auto& v) { c.process.drift_a = as_double(k, v); }},
      {"process.noise_var_s2", [](RunConfig& c, auto& k, auto& v) { c.process.noise_var_s2 = as_double(k, v); }},
      {"process.noise_autocorr_rho", [](RunConfig& c, auto& k, auto& v) { c.process.noise_autocorr_rho = as_double(k, v); }},
      {"process.step_dt", [](RunConfig& c, auto& k, auto& v) { c.process.step_dt = as_double(k, v); }},
      {"process.initial_edits_n0", [](RunConfig& c, auto& k, auto& v) { c.process.initial_edits_n0 = as_double(k, v); }},

      {"corpus.horizon", [](RunConfig& c, auto& k, auto& v) { c.corpus.horizon = as_double(k, v); }},
      {"corpus.rate_model",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "constant") c.corpus.rate.kind = RateModel::Kind::Constant;
         else if (v == "exponential") c.corpus.rate.kind = RateModel::Kind::Exponential;
         else fail(k, "expected \"constant\" or \"exponential\"");
       }},
      {"corpus.rate_r0", [](RunConfig& c, auto& k, auto& v) { c.corpus.rate.r0 = as_double(k, v); }},
      {"corpus.rate_g", [](RunConfig& c, auto& k, auto& v) { c.corpus.rate.g = as_double(k, v); }},
      {"corpus.article_count", [](RunConfig& c, auto& k, auto& v) { c.corpus.article_count = as_uint(k, v); }},
      {"corpus.epoch", [](RunConfig& c, auto& k, auto& v) { c.serialize.epoch = as_time(k, v); }},
      {"corpus.time_unit_seconds", [](RunConfig& c, auto& k, auto& v) { c.serialize.time_unit_seconds = as_double(k, v); }},
      {"corpus.editor_pool", [](RunConfig& c, auto& k, auto& v) { c.serialize.editor_pool = as_uint(k, v); }},
      {"corpus.featured_fraction", [](RunConfig& c, auto& k, auto& v) { c.planted.featured_fraction = as_double(k, v); }},
      {"corpus.featured_drift_multiplier", [](RunConfig& c, auto& k, auto& v) { c.planted.featured_drift_multiplier = as_double(k, v); }},
      {"corpus.bucket_min", [](RunConfig& c, auto& k, auto& v) { c.planted.bucket_min = as_int(k, v); }},
      {"corpus.bucket_max", [](RunConfig& c, auto& k, auto& v) { c.planted.bucket_max = as_int(k, v); }},
      {"corpus.max_edits", [](RunConfig& c, auto& k, auto& v) { c.max_edits = as_uint(k, v); }},

      {"ingest.bot_list", [](RunConfig& c, auto&, auto& v) { c.bot_list = v; }},
      {"ingest.burst_k", [](RunConfig& c, auto& k, auto& v) { c.burst.min_run = as_uint(k, v); }},
      {"ingest.burst_window", [](RunConfig& c, auto& k, auto& v) { c.burst.max_gap = static_cast<UnixSeconds>(as_uint(k, v)); }},

      {"fit.time_unit_seconds", [](RunConfig& c, auto& k, auto& v) { c.time_unit_seconds = as_double(k, v); }},
      {"fit.min_slice", [](RunConfig& c, auto& k, auto& v) { c.slicing.min_slice_size = as_uint(k, v); }},
      {"fit.slice_period", [](RunConfig& c, auto& k, auto& v) { c.slicing.boundary_period = as_double(k, v); }},
      {"fit.min_expected", [](RunConfig& c, auto& k, auto& v) { c.gof.min_expected = as_double(k, v); }},
      {"fit.grid_divisions", [](RunConfig& c, auto& k, auto& v) { c.gof.grid_divisions = as_int(k, v); }},
      {"fit.outlier_z", [](RunConfig& c, auto& k, auto& v) { c.outlier_z = as_double(k, v); }},
      {"fit.cutoff", [](RunConfig& c, auto& k, auto& v) { c.cutoff = as_time(k, v); }},
      {"fit.autocorr_max_lag", [](RunConfig& c, auto& k, auto& v) { c.autocorr_max_lag = as_uint(k, v); }},
      {"fit.autocorr_period", [](RunConfig& c, auto& k, auto& v) { c.autocorr_period = as_double(k, v); }},

      {"mixture.drift_a", [](RunConfig& c, auto& k, auto& v) { c.mixture.drift_a = as_double(k, v); }},
      {"mixture.noise_var_s2", [](RunConfig& c, auto& k, auto& v) { c.mixture.noise_var_s2 = as_double(k, v); }},
      {"mixture.horizon_T", [](RunConfig& c, auto& k, auto& v) { c.mixture.horizon_T = as_double(k, v); }},
      {"mixture.growth_g", [](RunConfig& c, auto& k, auto& v) { c.mixture.growth_g = as_double(k, v); }},
      {"mixture.n0", [](RunConfig& c, auto& k, auto& v) { c.mixture.n0 = as_double(k, v); }},
      {"mixture.age_floor", [](RunConfig& c, auto& k, auto& v) { c.mixture.age_floor = as_double(k, v); }},
      {"mixture.grid_n_min", [](RunConfig& c, auto& k, auto& v) { c.grid_n_min = as_double(k, v); }},
      {"mixture.grid_n_max", [](RunConfig& c, auto& k, auto& v) { c.grid_n_max = as_double(k, v); }},
      {"mixture.grid_points", [](RunConfig& c, auto& k, auto& v) { c.grid_points = as_uint(k, v); }},
      {"mixture.tail_n_lo", [](RunConfig& c, auto& k, auto& v) { c.tail_n_lo = as_double(k, v); }},
      {"mixture.tail_threshold", [](RunConfig& c, auto& k, auto& v) { c.tail_threshold = as_double(k, v); }},

      {"compare.bucket_min", [](RunConfig& c, auto& k, auto& v) { c.buckets.min = as_int(k, v); }},
      {"compare.bucket_max", [](RunConfig& c, auto& k, auto& v) { c.buckets.max = as_int(k, v); }},

      {"paths.out", [](RunConfig& c, auto&, auto& v) { c.out_dir = v; }},
      {"paths.log", [](RunConfig& c, auto&, auto& v) { c.log_path = v; }},
      {"paths.labels", [](RunConfig& c, auto&, auto& v) { c.labels_path = v; }},
  };
  return table;
}

// Re-raises a module's domain error as a config error naming the section.
template <class F>
void check(const std::string& section, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, "config [" + section + "]: " + e.what());
  }
}

}  // namespace

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    // Comments: '#' outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (view[i] == '"') quoted = !quoted;
      if (view[i] == '#' && !quoted) {
        view = view.substr(0, i);
        break;
      }
    }
    view = trim(view);
    if (view.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (view.front() == '[') {
      if (view.back() != ']' || view.size() < 3) throw Error(ErrorKind::Config, where + ": bad section header");
      section = std::string(trim(view.substr(1, view.size() - 2)));
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, where + ": expected key = value");
    const std::string_view key = trim(view.substr(0, eq));
    std::string_view value = trim(view.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::Config, where + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!raw.emplace(full, std::string(value)).second) {
      throw Error(ErrorKind::Config, where + ": duplicate key '" + full + "'");
    }
  }
  return raw;
}

RunConfig config_from_raw(const RawConfig& raw, RunConfig base) {
  const auto& table = setters();
  for (const auto& [key, value] : raw) {
    const auto it = table.find(key);
    if (it == table.end()) fail(key, "unknown key");
    it->second(base, key, value);
  }
  // The corpus and the serialized log share the run seed.
  base.corpus.seed = base.seed;
  base.serialize.seed = base.seed;
  base.validate();
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_raw(parse_config_text(text.str()));
}

void RunConfig::validate() const {
  check("process", [&] { process.validate(); });
  check("corpus", [&] {
    corpus.validate();
    if (!(serialize.time_unit_seconds > 0.0)) throw Error(ErrorKind::Domain, "time_unit_seconds must be > 0");
    if (serialize.editor_pool == 0) throw Error(ErrorKind::Domain, "editor_pool must be > 0");
    if (!(planted.featured_fraction >= 0.0 && planted.featured_fraction <= 1.0)) {
      throw Error(ErrorKind::Domain, "featured_fraction must be in [0, 1]");
    }
    if (planted.bucket_min > planted.bucket_max) throw Error(ErrorKind::Domain, "bucket_min > bucket_max");
  });
  check("ingest", [&] { burst.validate(); });
  check("fit", [&] {
    if (slicing.min_slice_size < 50) throw Error(ErrorKind::Domain, "min_slice must be >= 50");
    if (!(slicing.boundary_period >= 0.0)) throw Error(ErrorKind::Domain, "slice_period must be >= 0");
    if (!(gof.min_expected > 0.0)) throw Error(ErrorKind::Domain, "min_expected must be > 0");
    if (gof.grid_divisions < 1) throw Error(ErrorKind::Domain, "grid_divisions must be >= 1");
    if (!(outlier_z > 0.0)) throw Error(ErrorKind::Domain, "outlier_z must be > 0");
    if (!(time_unit_seconds > 0.0)) throw Error(ErrorKind::Domain, "time_unit_seconds must be > 0");
    if (!(autocorr_period > 0.0)) throw Error(ErrorKind::Domain, "autocorr_period must be > 0");
  });
  check("mixture", [&] {
    mixture.validate();
    if (!(grid_n_min > 0.0 && grid_n_max > grid_n_min)) {
      throw Error(ErrorKind::Domain, "need 0 < grid_n_min < grid_n_max");
    }
    if (grid_points < 2) throw Error(ErrorKind::Domain, "grid_points must be >= 2");
    if (!(tail_n_lo > 0.0)) throw Error(ErrorKind::Domain, "tail_n_lo must be > 0");
    if (!(tail_threshold > 0.0)) throw Error(ErrorKind::Domain, "tail_threshold must be > 0");
  });
  check("compare", [&] {
    if (buckets.min > buckets.max) throw Error(ErrorKind::Domain, "bucket_min > bucket_max");
  });
  if (threads == 0) throw Error(ErrorKind::Config, "config key 'threads': must be >= 1");
}

}  // namespace accrete
