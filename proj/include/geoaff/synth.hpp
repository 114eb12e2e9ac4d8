#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoaff/geometry.hpp"
#include "geoaff/ingest.hpp"
#include "geoaff/weights.hpp"

namespace geoaff {

struct LatticeSpec {
  int rows = 0;
  int cols = 0;
  double cell_size = 1.0;
};

// Row-major lattice cell id, e.g. "r3c12" for row 3, column 12 (0-based).
TractId lattice_tract_id(int row, int col);

// rows x cols axis-aligned squares of side cell_size. Exterior rings are
// counter-clockwise, closed (5 vertices). Requires rows*cols >= 4.
GeometrySet generate_lattice_region(const LatticeSpec& spec);

struct SarSpec {
  double rho = 0.0;    // |rho| strictly < 1
  double sigma = 1.0;  // innovation sd, > 0
  std::uint64_t seed = 0;
};

// Simultaneous autoregressive field x = (I - rho W)^-1 eps with
// eps ~ iid Normal(0, sigma^2) drawn from Rng(seed, 0) in index order.
// Dense LU solve; requires an island-free matrix. A solve whose relative
// residual exceeds 1e-8 (singular or near-singular system) is a
// NumericalError.
std::vector<double> generate_sar_field(const WeightsMatrix& w,
                                       const SarSpec& spec);

// Adds delta to every tract whose graph distance from center_index on
// `graph` is <= radius_steps (breadth-first over the adjacency structure;
// weights and direction of edges are ignored). Returns the planted index
// set, sorted ascending. The graph is an explicit parameter because the
// radius is measured in graph steps, not map units.
std::vector<std::size_t> plant_hotspot(std::vector<double>& x,
                                       const WeightsMatrix& graph,
                                       std::size_t center_index,
                                       int radius_steps, double delta);

// -------------------------------------------------------------------------
// Table synthesis: condition prevalences driven by a latent deprivation
// field, plus the socioeconomic indicator columns the regression stage
// expects.
// -------------------------------------------------------------------------

struct ConditionTableSpec {
  std::vector<std::string> names;  // empty -> "cond1".."condK"
  std::vector<double> base;        // a_k, percent units; K = base.size()
  std::vector<double> loadings;    // b_k, same length as base
  double condition_noise_sd = 2.5;
  double indicator_noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// Plausible defaults: six chronic conditions with mid-range base
// prevalences and positive loadings of varying strength.
ConditionTableSpec default_condition_spec();

struct SynthTables {
  PrevalenceTable prevalence;
  IndicatorTable indicators;
  std::size_t clip_events = 0;  // cells snapped back into their valid range
};

// condition_k = base_k + loading_k * deprivation + Normal(0, noise_sd),
// clipped to [0, 100]. Indicators: poverty, unemployment, crime and smoking
// are affine in deprivation plus independent noise; male_pct and
// age67plus_pct carry zero loading (pure noise about a base); population is
// a rounded count with a floor. Every clip is counted; a clip share above
// 1% of cells appends a warning to both tables. RNG streams: Rng(seed, 1+k)
// for condition k, Rng(seed, 1+K+t) for indicator t in canonical order —
// stream 0 is reserved for the SAR innovations so one scenario seed never
// reuses a stream.
SynthTables generate_condition_table(const std::vector<TractId>& ids,
                                     const std::vector<double>& deprivation,
                                     const ConditionTableSpec& spec);

// -------------------------------------------------------------------------
// Whole scenarios
// -------------------------------------------------------------------------

struct ScenarioSpec {
  LatticeSpec lattice{20, 20, 1.0};
  double rho = 0.3;
  double sigma = 1.0;
  bool hotspot = false;
  int hotspot_row = -1;  // -1 -> lattice center
  int hotspot_col = -1;
  int hotspot_radius = 2;
  double hotspot_delta_sd = 3.0;  // delta as a multiple of the field's sd
  double condition_noise_sd = 2.5;
  double indicator_noise_sd = 1.0;
  std::uint64_t seed = 0;
};

struct Scenario {
  GeometrySet geometry;
  PrevalenceTable prevalence;
  IndicatorTable indicators;
  std::vector<double> deprivation;  // canonical (sorted-id) order
  std::vector<TractId> planted;     // sorted; empty without a hotspot
  std::size_t clip_events = 0;
  std::vector<std::string> warnings;
};

// Deprivation = SAR field on the queen row-standardized lattice graph; the
// optional hotspot is a rook-graph ball of radius hotspot_radius around the
// chosen cell with delta = hotspot_delta_sd * sample sd of the field.
// Tables are generated from the (possibly bumped) field with
// default_condition_spec() noise levels overridden by the spec.
Scenario generate_scenario(const ScenarioSpec& spec);

}  // namespace geoaff
