#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoaff/geometry.hpp"
#include "geoaff/tract.hpp"

namespace geoaff {

// ---------------------------------------------------------------------------
// Parsed tables. Cells hold std::nullopt for missing values (blank cells are
// silently missing; non-blank unparseable cells become missing with a
// recorded warning). Range violations warn and keep the value unless
// strict_ranges is set, in which case they are hard errors.
// ---------------------------------------------------------------------------

struct PrevalenceTable {
  std::vector<std::string> condition_names;
  std::map<TractId, std::vector<std::optional<double>>> rows;
  std::vector<std::string> warnings;
};

enum class IndicatorKind {
  percent,  // expected within [0, 100]
  index,    // expected >= 0 (e.g. a crime index)
  count,    // nonnegative integer (e.g. population); negative is a hard error
};

struct IndicatorTable {
  std::vector<std::string> indicator_names;
  std::vector<IndicatorKind> kinds;
  std::map<TractId, std::vector<std::optional<double>>> rows;
  std::vector<std::string> warnings;
};

// Column mapping for the prevalence CSV: output name -> source column.
struct TableSchema {
  std::string id_column;
  std::vector<std::pair<std::string, std::string>> value_columns;
};

struct IndicatorColumn {
  std::string name;    // canonical indicator name, e.g. "poverty"
  std::string column;  // CSV column it comes from
  IndicatorKind kind = IndicatorKind::percent;
};

struct IndicatorSchema {
  std::string id_column;
  std::vector<IndicatorColumn> columns;
};

// Canonical indicator names the regression stage looks up.
inline constexpr const char* kPoverty = "poverty";
inline constexpr const char* kUnemployment = "unemployment";
inline constexpr const char* kCrime = "crime";
inline constexpr const char* kSmoking = "smoking";
inline constexpr const char* kMalePct = "male_pct";
inline constexpr const char* kAge67Pct = "age67plus_pct";
inline constexpr const char* kPopulation = "population";

PrevalenceTable parse_prevalence_csv(std::istream& in, const TableSchema& schema,
                                     bool strict_ranges = false);

IndicatorTable parse_indicator_csv(std::istream& in, const IndicatorSchema& schema,
                                   bool strict_ranges = false);

// GeoJSON FeatureCollection reader. Per feature: the tract id comes from
// properties[id_property] (falling back to the feature-level "id" member when
// id_property is empty); a missing id is a hard error. Non-polygon geometry,
// degenerate rings (< 4 vertices after closing, zero area) and properly
// self-intersecting rings exclude the feature into feature_errors. Unclosed
// rings are auto-closed with a warning; exteriors are normalized
// counter-clockwise and holes clockwise.
GeometrySet parse_geometry(std::istream& in, const std::string& id_property);

// ---------------------------------------------------------------------------
// Join
// ---------------------------------------------------------------------------

enum class JoinPolicy {
  drop_incomplete,  // drop tracts absent from any source or with missing cells
  strict,           // any mismatch is a hard error naming the tracts
};

struct DroppedTract {
  TractId id;
  std::string reason;
};

struct ValidationReport {
  std::size_t n_prevalence = 0;
  std::size_t n_indicators = 0;
  std::size_t n_geometry = 0;
  std::size_t n_joined = 0;
  std::vector<DroppedTract> dropped;     // sorted by tract id
  std::vector<std::string> warnings;     // merged from all three sources
};

// The joined, analysis-ready region. All aligned containers share the
// canonical order: tract_ids sorted lexicographically. No missing values
// remain after a successful join.
struct StudyRegion {
  std::vector<TractId> tract_ids;
  std::vector<std::string> condition_names;
  std::vector<std::vector<double>> prevalence;  // [tract][condition]
  std::vector<std::string> indicator_names;
  std::vector<std::vector<double>> indicators;  // [tract][indicator]
  std::vector<MultiPolygon> geometry;           // aligned with tract_ids
  ValidationReport validation;

  std::size_t size() const { return tract_ids.size(); }
  std::vector<double> prevalence_column(std::size_t k) const;
  std::vector<double> indicator_column(const std::string& name) const;
  std::optional<std::size_t> indicator_index(const std::string& name) const;
};

struct JoinResult {
  StudyRegion region;        // region.validation holds the same report
  ValidationReport report;
};

// Inner join on TractId across the three sources. drop_incomplete (default)
// drops any tract that is absent from a source or has a missing cell,
// recording one reason per tract; strict turns every such case into a
// ValidationError naming the offenders. A joined region with fewer than 2
// tracts is always a hard error.
JoinResult join_region(const PrevalenceTable& p, const IndicatorTable& ind,
                       const GeometrySet& g,
                       JoinPolicy policy = JoinPolicy::drop_incomplete);

}  // namespace geoaff
