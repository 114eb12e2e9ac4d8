#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoaff/ingest.hpp"

namespace geoaff {

// Per-condition exceedance thresholds: the unweighted regional mean of each
// condition's prevalence column.
std::vector<double> condition_thresholds(const StudyRegion& region);

// flags[tract][condition] = 1 iff prevalence is strictly greater than the
// threshold. A value exactly equal to the threshold does NOT count.
std::vector<std::vector<std::uint8_t>> exceedance_flags(
    const StudyRegion& region, const std::vector<double>& thresholds);

struct AffinityResult {
  std::vector<double> thresholds;                    // [condition]
  std::vector<std::vector<std::uint8_t>> flags;      // [tract][condition]
  std::vector<int> score;                            // [tract], 0..K
  double share_max = 0.0;  // fraction of tracts with score == K
};

// Affinity score per tract: the number of conditions whose prevalence exceeds
// the regional mean.
AffinityResult affinity_scores(const StudyRegion& region);

struct VariableStats {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;  // sample sd, N-1 denominator
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

struct DescriptiveStats {
  std::vector<VariableStats> variables;
};

// Descriptive table over all conditions, the affinity score and all
// indicators, in that order. Throws NumericalError if N < 2.
DescriptiveStats descriptive_stats(const StudyRegion& region);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> r;  // symmetric, unit diagonal
  std::vector<std::vector<double>> p;  // two-sided, exact t reference, df N-2
};

// Pearson correlations between named variables. A variable name resolves to a
// condition column, an indicator column, or the literal "affinity" (computed
// scores). Zero-variance variables are a NumericalError naming the variable.
CorrelationMatrix correlation_matrix(const StudyRegion& region,
                                     const std::vector<std::string>& variables);

// Resolve one variable by the same rules correlation_matrix uses.
std::vector<double> resolve_variable(const StudyRegion& region,
                                     const std::string& name);

}  // namespace geoaff
