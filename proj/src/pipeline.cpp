#include "geoaff/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "geoaff/affinity.hpp"
#include "geoaff/choropleth.hpp"
#include "geoaff/errors.hpp"
#include "geoaff/jsonio.hpp"
#include "geoaff/spatial.hpp"
#include "geoaff/synth.hpp"
#include "geoaff/weights.hpp"

namespace geoaff {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Output-directory plumbing: a lockfile against concurrent runs, and a guard
// that removes partially written artifacts when a run fails.
// ---------------------------------------------------------------------------

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".geoaff.lock") {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw IoError("output directory is locked by another run (remove " +
                    path_.string() + " if that run is gone)");
    }
    ::close(fd);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

class ArtifactGuard {
 public:
  void track(const fs::path& p) { written_.push_back(p); }
  void commit() { committed_ = true; }
  ~ArtifactGuard() {
    if (committed_) return;
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) {
    throw ValidationError("an output directory is required: set output.dir "
                          "in the config or pass --out");
  }
  const fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw IoError("cannot create output directory " + out.string() + ": " +
                  ec.message());
  }
  return out;
}

RunConfig load_with_overrides(const RunOptions& options) {
  RunConfig config = load_run_config(options.config_path);
  if (options.seed) config.seed = options.seed;
  if (!options.out_override.empty()) config.output.dir = options.out_override;
  if (config.synth && config.seed) config.synth->seed = *config.seed;
  return config;
}

// ---------------------------------------------------------------------------
// Region assembly
// ---------------------------------------------------------------------------

StudyRegion join_sources(const PrevalenceTable& prevalence,
                         const IndicatorTable& indicators,
                         const GeometrySet& geometry, JoinPolicy policy) {
  JoinResult joined = join_region(prevalence, indicators, geometry, policy);
  return std::move(joined.region);
}

}  // namespace

SourcedRegion build_region(const RunConfig& config) {
  SourcedRegion out;
  if (config.synth) {
    Scenario scenario = generate_scenario(*config.synth);
    out.region = join_sources(scenario.prevalence, scenario.indicators,
                              scenario.geometry, config.join_policy);
    SynthSummary summary;
    summary.planted = scenario.planted;
    summary.clip_events = scenario.clip_events;
    out.synth = std::move(summary);
    return out;
  }

  const InputFiles& in = *config.input;
  std::ifstream prev_file(in.prevalence_csv);
  if (!prev_file) throw IoError("cannot open " + in.prevalence_csv);
  const PrevalenceTable prevalence = parse_prevalence_csv(
      prev_file, config.schema.prevalence_schema(), config.schema.strict_ranges);

  std::ifstream ind_file(in.indicators_csv);
  if (!ind_file) throw IoError("cannot open " + in.indicators_csv);
  const IndicatorTable indicators = parse_indicator_csv(
      ind_file, config.schema.indicator_schema(), config.schema.strict_ranges);

  std::ifstream geo_file(in.geometry_geojson);
  if (!geo_file) throw IoError("cannot open " + in.geometry_geojson);
  const GeometrySet geometry = parse_geometry(geo_file, in.id_property);

  out.region = join_sources(prevalence, indicators, geometry, config.join_policy);
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Weights construction per config
// ---------------------------------------------------------------------------

GeometrySet region_geometry_set(const StudyRegion& region) {
  GeometrySet g;
  for (std::size_t i = 0; i < region.size(); ++i) {
    g.rows.emplace(region.tract_ids[i], region.geometry[i]);
  }
  return g;
}

WeightsMatrix moran_weights(const StudyRegion& region, const WeightsSpec& spec,
                            const GeometrySet& gs) {
  WeightsMatrix w;
  if (spec.kind == "queen") {
    w = queen_contiguity(gs, spec.snap_tol);
  } else if (spec.kind == "rook") {
    w = rook_contiguity(gs, spec.snap_tol);
  } else if (spec.kind == "knn") {
    w = knn_weights(centroids_of(gs), region.tract_ids, spec.k);
  } else {  // distance_band
    const auto centroids = centroids_of(gs);
    const double d = spec.distance > 0.0
                         ? spec.distance
                         : max_nearest_neighbor_distance(centroids);
    w = distance_band_weights(centroids, d, /*include_self=*/false);
  }
  if (spec.row_standardize) w = row_standardize(w);
  return w;
}

WeightsMatrix gi_weights(const StudyRegion& region, const WeightsSpec& spec,
                         const GeometrySet& gs) {
  (void)region;
  if (spec.gi_kind == "queen_self") {
    return add_self_loops(queen_contiguity(gs, spec.snap_tol));
  }
  if (spec.gi_kind == "rook_self") {
    return add_self_loops(rook_contiguity(gs, spec.snap_tol));
  }
  const auto centroids = centroids_of(gs);
  const double d = spec.gi_distance > 0.0
                       ? spec.gi_distance
                       : max_nearest_neighbor_distance(centroids);
  return distance_band_weights(centroids, d, /*include_self=*/true);
}

std::vector<std::string> correlation_variables(const StudyRegion& region) {
  std::vector<std::string> names = region.condition_names;
  names.push_back("affinity");
  for (const auto& n : region.indicator_names) names.push_back(n);
  return names;
}

// ---------------------------------------------------------------------------
// CSV serialization for synthesized tables (full precision round-trip)
// ---------------------------------------------------------------------------

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string prevalence_csv_text(const PrevalenceTable& t) {
  std::ostringstream out;
  out << "tract_id";
  for (const auto& name : t.condition_names) out << "," << csv_escape(name);
  out << "\n";
  for (const auto& [id, cells] : t.rows) {
    out << csv_escape(id.value);
    for (const auto& cell : cells) {
      out << ",";
      if (cell) out << csv_number(*cell);
    }
    out << "\n";
  }
  return out.str();
}

std::string indicator_csv_text(const IndicatorTable& t) {
  std::ostringstream out;
  out << "tract_id";
  for (const auto& name : t.indicator_names) out << "," << csv_escape(name);
  out << "\n";
  for (const auto& [id, cells] : t.rows) {
    out << csv_escape(id.value);
    for (const auto& cell : cells) {
      out << ",";
      if (cell) out << csv_number(*cell);
    }
    out << "\n";
  }
  return out.str();
}

std::string tracts_geojson_text(const GeometrySet& g) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& [id, shape] : g.rows) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    nlohmann::ordered_json props;
    props["tract_id"] = id.value;
    f["properties"] = props;
    f["geometry"] = geometry_to_geojson(shape);
    features.push_back(f);
  }
  fc["features"] = features;
  return dump_json(fc, 2);
}

void print_validation_summary(const StudyRegion& region, bool quiet) {
  if (quiet) return;
  const ValidationReport& v = region.validation;
  std::cout << "sources: prevalence " << v.n_prevalence << ", indicators "
            << v.n_indicators << ", geometry " << v.n_geometry << "\n";
  std::cout << "joined tracts: " << v.n_joined << "\n";
  std::cout << "dropped tracts: " << v.dropped.size() << "\n";
  for (const auto& d : v.dropped) {
    std::cout << "  " << d.id.value << ": " << d.reason << "\n";
  }
  if (!v.warnings.empty()) {
    std::cout << "warnings: " << v.warnings.size() << "\n";
    for (const auto& w : v.warnings) std::cout << "  " << w << "\n";
  }
}

}  // namespace

void run_validate(const RunOptions& options) {
  RunConfig config = load_with_overrides(options);
  if (config.synth) require_seed(config);
  const SourcedRegion sourced = build_region(config);
  print_validation_summary(sourced.region, options.quiet);
}

void run_synth(const RunOptions& options) {
  RunConfig config = load_with_overrides(options);
  if (!config.synth) {
    throw ValidationError("the synth command needs a [synth] section");
  }
  require_seed(config);
  const fs::path out = prepare_out_dir(config.output.dir);
  DirLock lock(out);
  ArtifactGuard guard;

  Scenario scenario = generate_scenario(*config.synth);
  const fs::path prev_path = out / "prevalence.csv";
  const fs::path ind_path = out / "indicators.csv";
  const fs::path geo_path = out / "tracts.geojson";
  guard.track(prev_path);
  guard.track(ind_path);
  guard.track(geo_path);
  write_text_file(prev_path, prevalence_csv_text(scenario.prevalence));
  write_text_file(ind_path, indicator_csv_text(scenario.indicators));
  write_text_file(geo_path, tracts_geojson_text(scenario.geometry));
  guard.commit();

  if (!options.quiet) {
    std::cout << "wrote " << prev_path.string() << "\n";
    std::cout << "wrote " << ind_path.string() << "\n";
    std::cout << "wrote " << geo_path.string() << "\n";
    std::cout << "tracts: " << scenario.geometry.rows.size()
              << ", planted hotspot tracts: " << scenario.planted.size()
              << ", clipped cells: " << scenario.clip_events << "\n";
  }
}

void run_analyze(const RunOptions& options) {
  RunConfig config = load_with_overrides(options);
  require_seed(config);
  const int threads = std::max(1, options.threads);
  const fs::path out = prepare_out_dir(config.output.dir);
  DirLock lock(out);
  ArtifactGuard guard;

  const SourcedRegion sourced = build_region(config);
  const StudyRegion& region = sourced.region;

  const AffinityResult affinity = affinity_scores(region);
  std::vector<double> aff(region.size());
  for (std::size_t i = 0; i < region.size(); ++i) {
    aff[i] = double(affinity.score[i]);
  }

  const DescriptiveStats table1 = descriptive_stats(region);
  const CorrelationMatrix table2 =
      correlation_matrix(region, correlation_variables(region));

  const GeometrySet gs = region_geometry_set(region);
  const WeightsMatrix w_moran = moran_weights(region, config.weights, gs);
  const std::uint64_t seed = config.seed.value_or(0);
  const MoranResult moran =
      config.inference.n_perm > 0
          ? morans_i_permutation(aff, w_moran, config.inference.n_perm, seed,
                                 threads)
          : morans_i(aff, w_moran);

  const WeightsMatrix w_gi = gi_weights(region, config.weights, gs);
  const HotSpotResult gi = getis_ord_gi_star(aff, w_gi, threads);
  const auto fdr_cats = fdr_classify(gi.gi_z, config.inference.alphas);
  const auto raw_cats = raw_classify(gi.gi_z, config.inference.alphas);

  const AffinityModelsResult models = fit_affinity_models(region, config.irls);

  std::vector<std::string> warnings = region.validation.warnings;
  for (const auto& w : gi.warnings) warnings.push_back("gi_star: " + w);
  if (models.model1) {
    for (const auto& w : models.model1->primary.warnings) {
      warnings.push_back("model1: " + w);
    }
  }
  if (models.model2) {
    for (const auto& w : models.model2->primary.warnings) {
      warnings.push_back("model2: " + w);
    }
  }

  const SynthSummary* synth =
      sourced.synth ? &*sourced.synth : nullptr;
  const nlohmann::ordered_json report =
      build_report(config, region, affinity, table1, table2, moran, gi,
                   fdr_cats, raw_cats, models, warnings, synth);
  const nlohmann::ordered_json results =
      build_results_geojson(region, affinity, gi, fdr_cats, raw_cats);

  const fs::path report_path = out / "report.json";
  const fs::path results_path = out / "results.geojson";
  const fs::path aff_svg_path = out / "choropleth_affinity.svg";
  const fs::path hot_svg_path = out / "choropleth_hotspots.svg";
  const fs::path raw_svg_path = out / "choropleth_hotspots_raw.svg";

  guard.track(report_path);
  write_text_file(report_path, dump_json(report, 2));
  guard.track(results_path);
  write_text_file(results_path, dump_json(results, 2));

  ChoroplethSpec aff_spec;
  aff_spec.bins = config.output.svg_bins;
  aff_spec.title = "affinity score";
  aff_spec.config_hash = config.hash;
  guard.track(aff_svg_path);
  write_text_file(aff_svg_path, render_value_choropleth(
                                    region.tract_ids, region.geometry, aff,
                                    aff_spec));

  ChoroplethSpec hot_spec;
  hot_spec.bins = config.output.svg_bins;
  hot_spec.title = "hot/cold clusters (FDR)";
  hot_spec.config_hash = config.hash;
  guard.track(hot_svg_path);
  write_text_file(hot_svg_path,
                  render_category_choropleth(region.tract_ids, region.geometry,
                                             fdr_cats, hot_spec));

  ChoroplethSpec raw_spec;
  raw_spec.bins = config.output.svg_bins;
  raw_spec.title = "hot/cold clusters (raw p)";
  raw_spec.config_hash = config.hash;
  guard.track(raw_svg_path);
  write_text_file(raw_svg_path,
                  render_category_choropleth(region.tract_ids, region.geometry,
                                             raw_cats, raw_spec));

  if (config.output.write_weights) {
    const fs::path weights_path = out / "weights.json";
    guard.track(weights_path);
    write_text_file(weights_path, weights_to_json(w_moran, region.tract_ids));
  }
  guard.commit();

  if (!options.quiet) {
    print_validation_summary(region, false);
    std::cout << "affinity: mean share at max " << affinity.share_max << "\n";
    std::cout << "moran: I=" << moran.i << " z=" << moran.z
              << " p_analytic=" << moran.p_analytic;
    if (moran.p_permutation) {
      std::cout << " p_permutation=" << *moran.p_permutation;
    }
    std::cout << "\n";
    std::size_t hot = 0, cold = 0;
    for (const auto c : fdr_cats) {
      if (c == HotspotCategory::hot99 || c == HotspotCategory::hot95 ||
          c == HotspotCategory::hot90) {
        ++hot;
      } else if (c == HotspotCategory::cold99 || c == HotspotCategory::cold95 ||
                 c == HotspotCategory::cold90) {
        ++cold;
      }
    }
    std::cout << "hotspots (FDR): " << hot << " hot, " << cold << " cold of "
              << fdr_cats.size() << "\n";
    if (!models.errors.empty()) {
      for (const auto& e : models.errors) std::cout << "model error: " << e << "\n";
    }
    std::cout << "wrote " << report_path.string() << "\n";
  }
}

}  // namespace geoaff
