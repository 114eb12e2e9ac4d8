#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoaff/affinity.hpp"
#include "geoaff/config.hpp"
#include "geoaff/regression.hpp"
#include "geoaff/spatial.hpp"

namespace geoaff {

inline constexpr const char* kVersion = "0.1.0";

// Ground truth echoed into the report for synthetic runs.
struct SynthSummary {
  std::vector<TractId> planted;
  std::size_t clip_events = 0;
};

// Assembles the analysis report. Key order is fixed; all doubles render with
// 17 significant digits through dump_json, and the report carries no
// timestamps — identical inputs give byte-identical reports.
nlohmann::ordered_json build_report(
    const RunConfig& config, const StudyRegion& region,
    const AffinityResult& affinity, const DescriptiveStats& table1,
    const CorrelationMatrix& table2, const MoranResult& moran,
    const HotSpotResult& gi, const std::vector<HotspotCategory>& fdr_cats,
    const std::vector<HotspotCategory>& raw_cats,
    const AffinityModelsResult& models,
    const std::vector<std::string>& warnings, const SynthSummary* synth);

// GeoJSON geometry object: "Polygon" for single-part shapes, otherwise
// "MultiPolygon".
nlohmann::ordered_json geometry_to_geojson(const MultiPolygon& mp);

// FeatureCollection with one feature per tract (canonical order), carrying
// properties id, affinity, gi_z, gi_p, hotspot_cat and hotspot_cat_raw plus
// the tract geometry, so the artifact can be re-ingested as a region.
nlohmann::ordered_json build_results_geojson(
    const StudyRegion& region, const AffinityResult& affinity,
    const HotSpotResult& gi, const std::vector<HotspotCategory>& fdr_cats,
    const std::vector<HotspotCategory>& raw_cats);

}  // namespace geoaff
