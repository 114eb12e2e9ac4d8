#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "geoaff/config.hpp"
#include "geoaff/report.hpp"

namespace geoaff {

struct RunOptions {
  std::string config_path;
  std::string out_override;           // overrides output.dir when non-empty
  std::optional<std::uint64_t> seed;  // overrides inference.seed
  int threads = 1;
  bool quiet = false;
};

// A study region together with synthetic ground truth when it came from a
// generated scenario.
struct SourcedRegion {
  StudyRegion region;
  std::optional<SynthSummary> synth;
};

// Loads input files or generates the configured scenario, then joins.
SourcedRegion build_region(const RunConfig& config);

// Subcommand bodies. They throw:
//   ValidationError -> exit 1, IoError -> exit 2, NumericalError -> exit 3;
// the CLI maps exceptions to exit codes. On failure every artifact written
// by the failing run is removed again.
void run_validate(const RunOptions& options);
void run_analyze(const RunOptions& options);
void run_synth(const RunOptions& options);

}  // namespace geoaff
