#include "geoaff/report.hpp"

#include <array>

#include "geoaff/rng.hpp"

namespace geoaff {

namespace {

using nlohmann::ordered_json;

ordered_json fit_json(const RobustFit& fit) {
  ordered_json j;
  j["coef"] = fit.coef;
  j["se"] = fit.se;
  j["p"] = fit.p;
  j["ci_low"] = fit.ci_low;
  j["ci_high"] = fit.ci_high;
  j["scale"] = fit.scale;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

ordered_json model_json(const ModelFit& m) {
  ordered_json j;
  j["terms"] = m.primary.terms;
  j["m_huber_bisquare"] = fit_json(m.primary);
  j["ols"] = fit_json(m.ols);
  ordered_json hc1;
  hc1["se"] = m.hc1_se;
  hc1["p"] = m.hc1_p;
  hc1["ci_low"] = m.hc1_ci_low;
  hc1["ci_high"] = m.hc1_ci_high;
  j["ols_hc1"] = hc1;
  ordered_json diag;
  ordered_json vif;
  vif["names"] = m.vif.names;
  vif["vif"] = m.vif.vif;
  vif["mean_vif"] = m.vif.mean_vif;
  diag["vif"] = vif;
  ordered_json lt;
  lt["coef_hat_sq"] = m.linktest.coef_hat_sq;
  lt["p_hat_sq"] = m.linktest.p_hat_sq;
  lt["pass"] = m.linktest.pass;
  diag["linktest"] = lt;
  j["diagnostics"] = diag;
  return j;
}

ordered_json category_counts(const std::vector<HotspotCategory>& cats) {
  static constexpr std::array<HotspotCategory, 7> order{
      HotspotCategory::hot99,  HotspotCategory::hot95,
      HotspotCategory::hot90,  HotspotCategory::notsig,
      HotspotCategory::cold90, HotspotCategory::cold95,
      HotspotCategory::cold99};
  ordered_json j;
  for (const auto c : order) {
    std::size_t n = 0;
    for (const auto v : cats) {
      if (v == c) ++n;
    }
    j[to_string(c)] = n;
  }
  return j;
}

ordered_json ring_coords(const Ring& ring) {
  ordered_json arr = ordered_json::array();
  for (const auto& pt : ring) {
    arr.push_back(ordered_json::array({pt.x, pt.y}));
  }
  return arr;
}

}  // namespace

ordered_json geometry_to_geojson(const MultiPolygon& mp) {
  ordered_json g;
  if (mp.parts.size() == 1) {
    g["type"] = "Polygon";
    ordered_json rings = ordered_json::array();
    rings.push_back(ring_coords(mp.parts[0].exterior));
    for (const auto& hole : mp.parts[0].holes) rings.push_back(ring_coords(hole));
    g["coordinates"] = rings;
  } else {
    g["type"] = "MultiPolygon";
    ordered_json polys = ordered_json::array();
    for (const auto& part : mp.parts) {
      ordered_json rings = ordered_json::array();
      rings.push_back(ring_coords(part.exterior));
      for (const auto& hole : part.holes) rings.push_back(ring_coords(hole));
      polys.push_back(rings);
    }
    g["coordinates"] = polys;
  }
  return g;
}

ordered_json build_report(
    const RunConfig& config, const StudyRegion& region,
    const AffinityResult& affinity, const DescriptiveStats& table1,
    const CorrelationMatrix& table2, const MoranResult& moran,
    const HotSpotResult& gi, const std::vector<HotspotCategory>& fdr_cats,
    const std::vector<HotspotCategory>& raw_cats,
    const AffinityModelsResult& models,
    const std::vector<std::string>& warnings, const SynthSummary* synth) {
  ordered_json report;

  ordered_json meta;
  meta["version"] = kVersion;
  meta["config_hash"] = config.hash;
  if (config.seed) {
    meta["seed"] = *config.seed;
  } else {
    meta["seed"] = nullptr;
  }
  meta["rng"] = kRngName;
  report["metadata"] = meta;

  report["warnings"] = warnings;

  ordered_json validation;
  validation["n_prevalence"] = region.validation.n_prevalence;
  validation["n_indicators"] = region.validation.n_indicators;
  validation["n_geometry"] = region.validation.n_geometry;
  validation["n_joined"] = region.validation.n_joined;
  ordered_json dropped = ordered_json::array();
  for (const auto& d : region.validation.dropped) {
    ordered_json row;
    row["id"] = d.id.value;
    row["reason"] = d.reason;
    dropped.push_back(row);
  }
  validation["dropped"] = dropped;
  report["validation"] = validation;

  ordered_json t1;
  ordered_json rows = ordered_json::array();
  for (const auto& v : table1.variables) {
    ordered_json row;
    row["name"] = v.name;
    row["mean"] = v.mean;
    row["sd"] = v.sd;
    row["min"] = v.min;
    row["max"] = v.max;
    row["n"] = v.n;
    rows.push_back(row);
  }
  t1["rows"] = rows;
  t1["affinity_share_max"] = affinity.share_max;
  report["table1"] = t1;

  ordered_json t2;
  t2["names"] = table2.names;
  t2["r"] = table2.r;
  t2["p"] = table2.p;
  report["table2"] = t2;

  ordered_json mj;
  mj["i"] = moran.i;
  mj["expected"] = moran.expected;
  mj["variance"] = moran.variance;
  mj["z"] = moran.z;
  mj["p_analytic"] = moran.p_analytic;
  if (moran.p_permutation) {
    mj["p_permutation"] = *moran.p_permutation;
  } else {
    mj["p_permutation"] = nullptr;
  }
  mj["n_perm"] = moran.n_perm;
  mj["seed"] = moran.seed;
  report["moran"] = mj;

  ordered_json hs;
  hs["alpha_levels"] = gi.alpha_levels;
  hs["counts"] = category_counts(fdr_cats);
  hs["raw_counts"] = category_counts(raw_cats);
  report["hotspots"] = hs;

  ordered_json t3;
  if (models.model1) {
    t3["model1"] = model_json(*models.model1);
  } else {
    t3["model1"] = nullptr;
  }
  if (models.model2) {
    t3["model2"] = model_json(*models.model2);
  } else {
    t3["model2"] = nullptr;
  }
  t3["errors"] = models.errors;
  report["table3"] = t3;

  if (synth) {
    ordered_json sj;
    ordered_json planted = ordered_json::array();
    for (const auto& id : synth->planted) planted.push_back(id.value);
    sj["planted"] = planted;
    sj["clip_events"] = synth->clip_events;
    report["synth"] = sj;
  }
  return report;
}

ordered_json build_results_geojson(
    const StudyRegion& region, const AffinityResult& affinity,
    const HotSpotResult& gi, const std::vector<HotspotCategory>& fdr_cats,
    const std::vector<HotspotCategory>& raw_cats) {
  ordered_json fc;
  fc["type"] = "FeatureCollection";
  ordered_json features = ordered_json::array();
  for (std::size_t i = 0; i < region.size(); ++i) {
    ordered_json f;
    f["type"] = "Feature";
    ordered_json props;
    props["id"] = region.tract_ids[i].value;
    props["affinity"] = affinity.score[i];
    props["gi_z"] = gi.gi_z[i];
    props["gi_p"] = gi.p[i];
    props["hotspot_cat"] = to_string(fdr_cats[i]);
    props["hotspot_cat_raw"] = to_string(raw_cats[i]);
    f["properties"] = props;
    f["geometry"] = geometry_to_geojson(region.geometry[i]);
    features.push_back(f);
  }
  fc["features"] = features;
  return fc;
}

}  // namespace geoaff
