// accrete: simulate, fit, mixture and compare subcommands.
//
// Exit codes: 0 ok, 2 config/usage, 3 I/O, 4 data, 5 numerical.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "accrete/commands.hpp"
#include "accrete/error.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::size_t> min_slice;
  std::optional<double> min_expected;
  std::optional<std::string> log;
  std::optional<std::string> labels;
};

accrete::RunConfig resolve(const Overrides& o) {
  accrete::RunConfig c = o.config_path.empty() ? accrete::RunConfig{} : accrete::load_config(o.config_path);
  if (o.seed) {
    c.seed = *o.seed;
    c.corpus.seed = *o.seed;
    c.serialize.seed = *o.seed;
  }
  if (o.out) c.out_dir = *o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.min_slice) c.slicing.min_slice_size = *o.min_slice;
  if (o.min_expected) c.gof.min_expected = *o.min_expected;
  if (o.log) c.log_path = *o.log;
  if (o.labels) c.labels_path = *o.labels;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative edit accretion: simulation and statistics"};
  app.require_subcommand(1);
  Overrides o;

  using Command = accrete::CommandResult (*)(const accrete::RunConfig&);
  Command chosen = nullptr;

  auto add = [&](const char* name, const char* help, Command cmd, bool log, bool labels) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config_path, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--min-slice", o.min_slice, "Minimum articles per slice (default 400)");
    sub->add_option("--min-expected", o.min_expected, "Minimum expected count per bin (default 8)");
    if (log) sub->add_option("--log", o.log, "Edit log TSV");
    if (labels) sub->add_option("--labels", o.labels, "Labeling TSV");
    sub->callback([&chosen, cmd] { chosen = cmd; });
  };
  add("simulate", "Simulate a corpus and write an edit log with its true parameters", accrete::cmd_simulate, false, false);
  add("fit", "Slice, fit and test an edit log", accrete::cmd_fit, true, false);
  add("mixture", "Tabulate the age-mixture density and classify its tail", accrete::cmd_mixture, false, false);
  add("compare", "Compare labeled populations by visibility bucket", accrete::cmd_compare, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const accrete::CommandResult result = chosen(resolve(o));
    for (const auto& p : result.outputs) std::cout << p.string() << '\n';
    return 0;
  } catch (const accrete::Error& e) {
    std::cerr << "accrete: " << accrete::to_string(e.kind()) << ": " << e.what() << '\n';
    return accrete::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "accrete: error: " << e.what() << '\n';
    return 4;
  }
}
