#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geoaff/errors.hpp"
#include "geoaff/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 numerical
// failure, 64 command-line usage error.
int dispatch(const std::string& command, const geoaff::RunOptions& options) {
  try {
    if (command == "validate") {
      geoaff::run_validate(options);
    } else if (command == "analyze") {
      geoaff::run_analyze(options);
    } else {
      geoaff::run_synth(options);
    }
    return 0;
  } catch (const geoaff::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const geoaff::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const geoaff::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tract-level chronic-condition affinity scores, spatial "
               "clustering statistics and robust regression"};
  app.require_subcommand(1);

  geoaff::RunOptions options;
  std::uint64_t seed_value = 0;

  struct SubOpts {
    CLI::App* cmd;
    CLI::Option* seed;
  };
  const auto add_common = [&](const std::string& name, const std::string& desc,
                              bool with_threads) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", options.config_path, "run configuration file")
        ->required();
    cmd->add_option("--out", options.out_override,
                    "output directory (overrides output.dir)");
    CLI::Option* seed =
        cmd->add_option("--seed", seed_value, "seed (overrides inference.seed)");
    cmd->add_flag("--quiet", options.quiet, "suppress progress output");
    if (with_threads) {
      cmd->add_option("--threads", options.threads, "worker threads")
          ->check(CLI::PositiveNumber);
    }
    return SubOpts{cmd, seed};
  };

  const SubOpts validate =
      add_common("validate", "check inputs and report the join", false);
  const SubOpts analyze =
      add_common("analyze", "run the full analysis pipeline", true);
  const SubOpts synth =
      add_common("synth", "write a synthetic dataset", false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  const SubOpts* chosen = nullptr;
  std::string command;
  if (app.got_subcommand(validate.cmd)) {
    chosen = &validate;
    command = "validate";
  } else if (app.got_subcommand(analyze.cmd)) {
    chosen = &analyze;
    command = "analyze";
  } else {
    chosen = &synth;
    command = "synth";
  }
  if (chosen->seed->count() > 0) options.seed = seed_value;
  return dispatch(command, options);
}
