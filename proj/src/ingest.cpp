#include "geoaff/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geoaff/csv.hpp"
#include "geoaff/errors.hpp"

namespace geoaff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double_cell(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

// Shared row scaffolding for both CSV tables: id extraction, duplicate
// detection, per-cell parse with warnings.
template <class OnCell>
void walk_csv_rows(const CsvTable& table, std::size_t id_col,
                   std::map<TractId, std::vector<std::optional<double>>>& rows,
                   std::size_t n_values, const OnCell& on_cell) {
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string id = trim(row[id_col]);
    if (id.empty()) {
      throw ValidationError("record " + std::to_string(r + 2) +
                            " has an empty tract id");
    }
    TractId tract{id};
    if (rows.count(tract)) {
      throw ValidationError("duplicate tract id '" + id + "'");
    }
    std::vector<std::optional<double>> cells(n_values);
    for (std::size_t k = 0; k < n_values; ++k) {
      cells[k] = on_cell(tract, k, row);
    }
    rows.emplace(std::move(tract), std::move(cells));
  }
}

}  // namespace

PrevalenceTable parse_prevalence_csv(std::istream& in, const TableSchema& schema,
                                     bool strict_ranges) {
  const CsvTable table = read_csv(in);
  const std::size_t id_col = table.column_index(schema.id_column);

  PrevalenceTable out;
  std::vector<std::size_t> value_cols;
  for (const auto& [name, column] : schema.value_columns) {
    out.condition_names.push_back(name);
    value_cols.push_back(table.column_index(column));
  }

  walk_csv_rows(
      table, id_col, out.rows, value_cols.size(),
      [&](const TractId& id, std::size_t k,
          const std::vector<std::string>& row) -> std::optional<double> {
        const std::string& raw = row[value_cols[k]];
        auto value = parse_double_cell(raw);
        if (!value) {
          if (!trim(raw).empty()) {
            out.warnings.push_back("tract " + id.value + ": unparseable " +
                                   out.condition_names[k] + " value '" +
                                   trim(raw) + "' treated as missing");
          }
          return std::nullopt;
        }
        if (*value < 0.0 || *value > 100.0) {
          const std::string msg = "tract " + id.value + ": " +
                                  out.condition_names[k] + " prevalence " +
                                  std::to_string(*value) +
                                  " outside [0, 100]";
          if (strict_ranges) throw ValidationError(msg);
          out.warnings.push_back(msg);
        }
        return value;
      });
  return out;
}

IndicatorTable parse_indicator_csv(std::istream& in, const IndicatorSchema& schema,
                                   bool strict_ranges) {
  const CsvTable table = read_csv(in);
  const std::size_t id_col = table.column_index(schema.id_column);

  IndicatorTable out;
  std::vector<std::size_t> value_cols;
  for (const auto& col : schema.columns) {
    out.indicator_names.push_back(col.name);
    out.kinds.push_back(col.kind);
    value_cols.push_back(table.column_index(col.column));
  }

  walk_csv_rows(
      table, id_col, out.rows, value_cols.size(),
      [&](const TractId& id, std::size_t k,
          const std::vector<std::string>& row) -> std::optional<double> {
        const std::string& raw = row[value_cols[k]];
        auto value = parse_double_cell(raw);
        if (!value) {
          if (!trim(raw).empty()) {
            out.warnings.push_back("tract " + id.value + ": unparseable " +
                                   out.indicator_names[k] + " value '" +
                                   trim(raw) + "' treated as missing");
          }
          return std::nullopt;
        }
        const std::string& name = out.indicator_names[k];
        switch (out.kinds[k]) {
          case IndicatorKind::percent:
            if (*value < 0.0 || *value > 100.0) {
              const std::string msg = "tract " + id.value + ": " + name + " " +
                                      std::to_string(*value) +
                                      " outside [0, 100]";
              if (strict_ranges) throw ValidationError(msg);
              out.warnings.push_back(msg);
            }
            break;
          case IndicatorKind::index:
            if (*value < 0.0) {
              const std::string msg = "tract " + id.value + ": " + name + " " +
                                      std::to_string(*value) + " is negative";
              if (strict_ranges) throw ValidationError(msg);
              out.warnings.push_back(msg);
            }
            break;
          case IndicatorKind::count:
            if (*value < 0.0) {
              throw ValidationError("tract " + id.value + ": negative " + name +
                                    " " + std::to_string(*value));
            }
            if (*value != std::floor(*value)) {
              out.warnings.push_back("tract " + id.value + ": " + name + " " +
                                     std::to_string(*value) +
                                     " is not an integer");
            }
            break;
        }
        return value;
      });
  return out;
}

// ---------------------------------------------------------------------------
// GeoJSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

Ring ring_from_json(const json& coords) {
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() ||
        !pt[1].is_number()) {
      throw ValidationError("ring vertex is not a numeric [x, y] pair");
    }
    ring.push_back(Point{pt[0].get<double>(), pt[1].get<double>()});
  }
  return ring;
}

// Close + validate + orient one ring. `exterior` controls the target
// orientation. Throws ValidationError for unfixable defects; appends to
// `warnings` for the auto-close fix.
Ring normalize_ring(Ring ring, bool exterior, const std::string& feature_label,
                    std::vector<std::string>& warnings) {
  if (ring.size() < 3) {
    throw ValidationError("ring has fewer than 3 vertices");
  }
  if (!ring_is_closed(ring)) {
    ring.push_back(ring.front());
    warnings.push_back(feature_label + ": unclosed ring auto-closed");
  }
  if (ring.size() < 4) {
    throw ValidationError("ring has fewer than 4 vertices after closing");
  }
  const double area = ring_signed_area(ring);
  if (area == 0.0) {
    throw ValidationError("ring has zero area");
  }
  if (ring_self_intersects(ring)) {
    throw ValidationError("ring is self-intersecting");
  }
  const bool ccw = area > 0.0;
  if (ccw != exterior) {
    std::reverse(ring.begin(), ring.end());
  }
  return ring;
}

Polygon polygon_from_json(const json& rings, const std::string& feature_label,
                          std::vector<std::string>& warnings) {
  if (!rings.is_array() || rings.empty()) {
    throw ValidationError("Polygon has no rings");
  }
  Polygon poly;
  poly.exterior =
      normalize_ring(ring_from_json(rings[0]), true, feature_label, warnings);
  for (std::size_t h = 1; h < rings.size(); ++h) {
    poly.holes.push_back(
        normalize_ring(ring_from_json(rings[h]), false, feature_label, warnings));
  }
  return poly;
}

}  // namespace

GeometrySet parse_geometry(std::istream& in, const std::string& id_property) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid GeoJSON: ") + e.what());
  }

  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ValidationError("GeoJSON root must be a FeatureCollection");
  }

  GeometrySet out;
  if (doc.contains("crs")) out.crs_note = doc["crs"].dump();

  const auto& features = doc["features"];
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& feature = features[f];
    const std::string ordinal = "feature " + std::to_string(f);

    // Tract id: properties[id_property], else the feature "id" member.
    std::string id;
    if (!id_property.empty()) {
      if (!feature.contains("properties") || !feature["properties"].is_object() ||
          !feature["properties"].contains(id_property)) {
        throw ValidationError(ordinal + " is missing id property '" +
                              id_property + "'");
      }
      const auto& v = feature["properties"][id_property];
      id = v.is_string() ? v.get<std::string>() : v.dump();
    } else if (feature.contains("id")) {
      const auto& v = feature["id"];
      id = v.is_string() ? v.get<std::string>() : v.dump();
    } else {
      throw ValidationError(ordinal + " has no id (no 'id' member and no id property configured)");
    }
    if (id.empty()) throw ValidationError(ordinal + " has an empty tract id");

    const std::string label = "tract " + id;
    try {
      if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
        throw ValidationError("missing geometry");
      }
      const auto& geom = feature["geometry"];
      const std::string type = geom.value("type", "");
      if (!geom.contains("coordinates")) {
        throw ValidationError("geometry has no coordinates");
      }
      MultiPolygon mp;
      if (type == "Polygon") {
        mp.parts.push_back(
            polygon_from_json(geom["coordinates"], label, out.warnings));
      } else if (type == "MultiPolygon") {
        for (const auto& rings : geom["coordinates"]) {
          mp.parts.push_back(polygon_from_json(rings, label, out.warnings));
        }
        if (mp.parts.empty()) throw ValidationError("MultiPolygon has no parts");
      } else {
        throw ValidationError("unsupported geometry type '" + type + "'");
      }
      TractId tract{id};
      if (out.rows.count(tract)) {
        throw ValidationError("duplicate tract id '" + id + "' in GeoJSON");
      }
      out.rows.emplace(std::move(tract), std::move(mp));
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      // Duplicate ids poison the whole file; geometry defects only the feature.
      if (what.find("duplicate tract id") != std::string::npos) throw;
      out.feature_errors.push_back(FeatureIssue{id, what});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Join
// ---------------------------------------------------------------------------

std::vector<double> StudyRegion::prevalence_column(std::size_t k) const {
  std::vector<double> col(size());
  for (std::size_t i = 0; i < size(); ++i) col[i] = prevalence[i][k];
  return col;
}

std::optional<std::size_t> StudyRegion::indicator_index(
    const std::string& name) const {
  for (std::size_t i = 0; i < indicator_names.size(); ++i) {
    if (indicator_names[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<double> StudyRegion::indicator_column(const std::string& name) const {
  const auto idx = indicator_index(name);
  if (!idx) throw ValidationError("unknown indicator '" + name + "'");
  std::vector<double> col(size());
  for (std::size_t i = 0; i < size(); ++i) col[i] = indicators[i][*idx];
  return col;
}

JoinResult join_region(const PrevalenceTable& p, const IndicatorTable& ind,
                       const GeometrySet& g, JoinPolicy policy) {
  ValidationReport report;
  report.n_prevalence = p.rows.size();
  report.n_indicators = ind.rows.size();
  report.n_geometry = g.rows.size();
  report.warnings = p.warnings;
  report.warnings.insert(report.warnings.end(), ind.warnings.begin(),
                         ind.warnings.end());
  report.warnings.insert(report.warnings.end(), g.warnings.begin(),
                         g.warnings.end());
  for (const auto& issue : g.feature_errors) {
    report.warnings.push_back("geometry feature excluded (tract " + issue.id +
                              "): " + issue.message);
  }

  // Universe of ids across all sources, in canonical (sorted) order.
  std::set<TractId> universe;
  for (const auto& [id, cells] : p.rows) universe.insert(id);
  for (const auto& [id, cells] : ind.rows) universe.insert(id);
  for (const auto& [id, geom] : g.rows) universe.insert(id);

  std::vector<TractId> joined;
  for (const TractId& id : universe) {
    std::string reason;
    const auto pit = p.rows.find(id);
    const auto iit = ind.rows.find(id);
    const auto git = g.rows.find(id);
    if (pit == p.rows.end()) {
      reason = "absent from prevalence table";
    } else if (iit == ind.rows.end()) {
      reason = "absent from indicator table";
    } else if (git == g.rows.end()) {
      reason = "no geometry";
    } else {
      for (std::size_t k = 0; k < pit->second.size() && reason.empty(); ++k) {
        if (!pit->second[k]) {
          reason = "missing prevalence value (" + p.condition_names[k] + ")";
        }
      }
      for (std::size_t k = 0; k < iit->second.size() && reason.empty(); ++k) {
        if (!iit->second[k]) {
          reason = "missing indicator value (" + ind.indicator_names[k] + ")";
        }
      }
    }
    if (reason.empty()) {
      joined.push_back(id);
    } else {
      report.dropped.push_back(DroppedTract{id, reason});
    }
  }

  if (policy == JoinPolicy::strict && !report.dropped.empty()) {
    std::ostringstream msg;
    msg << "strict join: " << report.dropped.size() << " tract(s) incomplete:";
    const std::size_t show = std::min<std::size_t>(report.dropped.size(), 10);
    for (std::size_t i = 0; i < show; ++i) {
      msg << " " << report.dropped[i].id.value << " ("
          << report.dropped[i].reason << ")";
      if (i + 1 < show) msg << ",";
    }
    if (report.dropped.size() > show) msg << ", ...";
    throw ValidationError(msg.str());
  }

  if (joined.size() < 2) {
    throw ValidationError("joined region has " + std::to_string(joined.size()) +
                          " tract(s); at least 2 are required");
  }

  StudyRegion region;
  region.tract_ids = joined;
  region.condition_names = p.condition_names;
  region.indicator_names = ind.indicator_names;
  region.prevalence.reserve(joined.size());
  region.indicators.reserve(joined.size());
  region.geometry.reserve(joined.size());
  for (const TractId& id : joined) {
    const auto& pcells = p.rows.at(id);
    const auto& icells = ind.rows.at(id);
    std::vector<double> prow(pcells.size());
    for (std::size_t k = 0; k < pcells.size(); ++k) prow[k] = *pcells[k];
    std::vector<double> irow(icells.size());
    for (std::size_t k = 0; k < icells.size(); ++k) irow[k] = *icells[k];
    region.prevalence.push_back(std::move(prow));
    region.indicators.push_back(std::move(irow));
    region.geometry.push_back(g.rows.at(id));
  }
  report.n_joined = joined.size();
  region.validation = report;
  return JoinResult{std::move(region), std::move(report)};
}

}  // namespace geoaff
