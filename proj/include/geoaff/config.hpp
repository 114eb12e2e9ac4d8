#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoaff/ingest.hpp"
#include "geoaff/regression.hpp"
#include "geoaff/synth.hpp"

namespace geoaff {

// -------------------------------------------------------------------------
// Flat sectioned key/value config file (grammar documented in the README):
//   [section]
//   key = value        # trailing and whole-line comments with '#'
// Values are either "quoted strings" (\" and \\ escapes) or bare tokens.
// Duplicate keys within a section and keys before any section are errors.
// -------------------------------------------------------------------------

struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string raw;  // exact file bytes; the provenance hash covers these
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config_file(const std::string& path);

// FNV-1a 64-bit over the raw bytes, rendered "fnv1a64:<16 hex digits>".
std::string config_hash(const std::string& raw_bytes);

// -------------------------------------------------------------------------
// Typed run configuration
// -------------------------------------------------------------------------

struct InputFiles {
  std::string prevalence_csv;
  std::string indicators_csv;
  std::string geometry_geojson;
  std::string id_property = "GEOID";  // GeoJSON property naming the tract
};

struct SchemaSpec {
  std::string prevalence_id = "tract_id";
  std::vector<std::string> condition_columns;  // names double as columns
  std::string indicator_id = "tract_id";
  std::string poverty_column = "poverty";
  std::string unemployment_column = "unemployment";
  std::string crime_column = "crime";
  std::string smoking_column = "smoking";
  std::string male_column = "male_pct";
  std::string age67_column = "age67plus_pct";
  std::string population_column = "population";
  bool strict_ranges = false;

  TableSchema prevalence_schema() const;
  IndicatorSchema indicator_schema() const;
};

struct WeightsSpec {
  std::string kind = "queen";  // queen | rook | knn | distance_band
  double snap_tol = 0.0;       // 0 -> auto (1e-9 x bbox diagonal)
  std::size_t k = 8;           // knn only
  double distance = 0.0;       // distance_band only; 0 -> max 1-NN distance
  bool row_standardize = true;
  // Separate neighborhood for the local statistic (must include self):
  std::string gi_kind = "distance_band";  // distance_band|queen_self|rook_self
  double gi_distance = 0.0;               // 0 -> max 1-NN distance
};

struct InferenceSpec {
  int n_perm = 999;  // 0 disables the permutation test; otherwise >= 99
  std::array<double, 3> alphas{0.10, 0.05, 0.01};
};

struct OutputSpec {
  std::string dir;
  bool write_weights = false;
  int svg_bins = 5;  // quantile bins for continuous choropleths, 2..7
};

struct RunConfig {
  std::optional<InputFiles> input;
  std::optional<ScenarioSpec> synth;  // exactly one of input/synth
  SchemaSpec schema;
  WeightsSpec weights;
  InferenceSpec inference;
  IrlsConfig irls;
  OutputSpec output;
  JoinPolicy join_policy = JoinPolicy::drop_incomplete;
  std::optional<std::uint64_t> seed;
  std::string hash;  // "fnv1a64:..." of the config file bytes
};

// Parses and validates. Unknown sections or keys are ValidationErrors (they
// are almost always typos and would silently change the analysis).
RunConfig parse_run_config(const ConfigFile& file);
RunConfig load_run_config(const std::string& path);

// Seed is mandatory once permutations or synthesis are requested; called by
// the pipeline after any --seed override has been applied.
void require_seed(const RunConfig& config);

}  // namespace geoaff
