#include "geoaff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "geoaff/errors.hpp"
#include "geoaff/rng.hpp"
#include "geoaff/stats.hpp"

namespace geoaff {

TractId lattice_tract_id(int row, int col) {
  return TractId{"r" + std::to_string(row) + "c" + std::to_string(col)};
}

GeometrySet generate_lattice_region(const LatticeSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1 || spec.rows * spec.cols < 4) {
    throw ValidationError("lattice requires rows*cols >= 4");
  }
  if (!(spec.cell_size > 0.0)) {
    throw ValidationError("lattice cell_size must be positive");
  }
  GeometrySet g;
  const double s = spec.cell_size;
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      const double x0 = j * s, x1 = (j + 1) * s;
      const double y0 = i * s, y1 = (i + 1) * s;
      Polygon poly;
      poly.exterior = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
      MultiPolygon mp;
      mp.parts.push_back(poly);
      g.rows.emplace(lattice_tract_id(i, j), std::move(mp));
    }
  }
  g.crs_note = "synthetic lattice, unit coordinates";
  return g;
}

std::vector<double> generate_sar_field(const WeightsMatrix& w,
                                       const SarSpec& spec) {
  if (!(std::abs(spec.rho) < 1.0)) {
    throw ValidationError("SAR rho must satisfy |rho| < 1");
  }
  if (!(spec.sigma > 0.0)) {
    throw ValidationError("SAR sigma must be positive");
  }
  if (!w.islands.empty()) {
    throw ValidationError("SAR field requires an island-free weights matrix");
  }
  const std::size_t n = w.n;
  Rng rng(spec.seed, 0);
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(Eigen::Index(n));
  for (std::size_t i = 0; i < n; ++i) {
    eps[Eigen::Index(i)] = spec.sigma * rng.normal();
  }

  Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : w.neighbors[i]) {
      a(Eigen::Index(i), Eigen::Index(nb.index)) -= spec.rho * nb.weight;
    }
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(eps);
  const double denom = std::max(1.0, eps.cwiseAbs().maxCoeff());
  const double rel_resid = (a * x - eps).cwiseAbs().maxCoeff() / denom;
  if (!(rel_resid <= 1e-8)) {
    throw NumericalError("SAR system (I - rho W) is singular or ill-conditioned");
  }
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<std::size_t> plant_hotspot(std::vector<double>& x,
                                       const WeightsMatrix& graph,
                                       std::size_t center_index,
                                       int radius_steps, double delta) {
  if (graph.n != x.size()) {
    throw ValidationError("plant_hotspot: field and graph size mismatch");
  }
  if (center_index >= graph.n) {
    throw ValidationError("plant_hotspot: center index out of range");
  }
  if (radius_steps < 0) {
    throw ValidationError("plant_hotspot: radius must be >= 0");
  }
  std::vector<int> dist(graph.n, -1);
  std::deque<std::size_t> queue;
  dist[center_index] = 0;
  queue.push_back(center_index);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (dist[u] == radius_steps) continue;
    for (const auto& nb : graph.neighbors[u]) {
      if (nb.index == u) continue;  // ignore self loops
      if (dist[nb.index] < 0) {
        dist[nb.index] = dist[u] + 1;
        queue.push_back(nb.index);
      }
    }
  }
  std::vector<std::size_t> planted;
  for (std::size_t i = 0; i < graph.n; ++i) {
    if (dist[i] >= 0) {
      x[i] += delta;
      planted.push_back(i);
    }
  }
  return planted;  // ascending by construction
}

ConditionTableSpec default_condition_spec() {
  ConditionTableSpec spec;
  spec.base = {27.0, 11.0, 15.5, 7.5, 38.5, 5.0};
  spec.loadings = {2.0, 1.5, 1.8, 0.8, 2.4, 1.0};
  spec.condition_noise_sd = 2.5;
  spec.indicator_noise_sd = 1.0;
  return spec;
}

namespace {

struct ClipRange {
  double lo;
  double hi;
};

double clipped(double v, const ClipRange& r, std::size_t& events) {
  if (v < r.lo) { ++events; return r.lo; }
  if (v > r.hi) { ++events; return r.hi; }
  return v;
}

}  // namespace

SynthTables generate_condition_table(const std::vector<TractId>& ids,
                                     const std::vector<double>& deprivation,
                                     const ConditionTableSpec& spec) {
  const std::size_t n = ids.size();
  if (n != deprivation.size()) {
    throw ValidationError("condition table: ids and field length mismatch");
  }
  if (spec.base.empty() || spec.base.size() != spec.loadings.size()) {
    throw ValidationError("condition table: base/loadings length mismatch");
  }
  if (spec.condition_noise_sd < 0.0 || spec.indicator_noise_sd < 0.0) {
    throw ValidationError("condition table: noise sd must be >= 0");
  }
  const std::size_t k = spec.base.size();
  std::vector<std::string> names = spec.names;
  if (names.empty()) {
    for (std::size_t c = 0; c < k; ++c) {
      names.push_back("cond" + std::to_string(c + 1));
    }
  } else if (names.size() != k) {
    throw ValidationError("condition table: names/base length mismatch");
  }

  SynthTables out;
  out.prevalence.condition_names = names;
  const ClipRange pct{0.0, 100.0};

  std::vector<std::vector<std::optional<double>>> cond(
      n, std::vector<std::optional<double>>(k));
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(spec.seed, 1 + c);  // stream 0 belongs to the SAR innovations
    for (std::size_t i = 0; i < n; ++i) {
      const double noise = spec.condition_noise_sd * rng.normal();
      const double v = spec.base[c] + spec.loadings[c] * deprivation[i] + noise;
      cond[i][c] = clipped(v, pct, out.clip_events);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.prevalence.rows.emplace(ids[i], std::move(cond[i]));
  }

  // Indicators, canonical order. base + loading * deprivation + noise_scale
  // * indicator_noise_sd * N(0,1), clipped to range. Population is rounded.
  struct IndicatorGen {
    const char* name;
    IndicatorKind kind;
    double base;
    double loading;
    double noise_scale;
    ClipRange range;
  };
  const IndicatorGen gens[] = {
      {kPoverty, IndicatorKind::percent, 20.0, 5.0, 1.5, {0.0, 100.0}},
      {kUnemployment, IndicatorKind::percent, 9.0, 2.5, 1.0, {0.0, 100.0}},
      {kCrime, IndicatorKind::index, 120.0, 35.0, 10.0,
       {0.0, std::numeric_limits<double>::infinity()}},
      {kSmoking, IndicatorKind::percent, 22.0, 3.5, 1.5, {0.0, 100.0}},
      {kMalePct, IndicatorKind::percent, 48.0, 0.0, 1.5, {0.0, 100.0}},
      {kAge67Pct, IndicatorKind::percent, 13.0, 0.0, 2.5, {0.0, 100.0}},
      {kPopulation, IndicatorKind::count, 4500.0, 900.0, 300.0,
       {50.0, std::numeric_limits<double>::infinity()}},
  };
  std::vector<std::vector<std::optional<double>>> ind(
      n, std::vector<std::optional<double>>(std::size(gens)));
  for (std::size_t t = 0; t < std::size(gens); ++t) {
    const auto& gen = gens[t];
    out.indicators.indicator_names.push_back(gen.name);
    out.indicators.kinds.push_back(gen.kind);
    Rng rng(spec.seed, 1 + k + t);
    for (std::size_t i = 0; i < n; ++i) {
      const double noise = gen.noise_scale * spec.indicator_noise_sd * rng.normal();
      double v = gen.base + gen.loading * deprivation[i] + noise;
      v = clipped(v, gen.range, out.clip_events);
      if (gen.kind == IndicatorKind::count) v = std::round(v);
      ind[i][t] = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.indicators.rows.emplace(ids[i], std::move(ind[i]));
  }

  const std::size_t cells = n * (k + std::size(gens));
  if (cells > 0 && double(out.clip_events) > 0.01 * double(cells)) {
    std::ostringstream msg;
    msg << "synthetic tables: " << out.clip_events << " of " << cells
        << " cells were clipped to their valid range (> 1%)";
    out.prevalence.warnings.push_back(msg.str());
    out.indicators.warnings.push_back(msg.str());
  }
  return out;
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  Scenario out;
  out.geometry = generate_lattice_region(spec.lattice);
  const std::vector<TractId> ids = out.geometry.sorted_ids();

  const WeightsMatrix queen = queen_contiguity(out.geometry);
  const WeightsMatrix w = row_standardize(queen);
  SarSpec sar{spec.rho, spec.sigma, spec.seed};
  out.deprivation = generate_sar_field(w, sar);

  if (spec.hotspot) {
    int row = spec.hotspot_row, col = spec.hotspot_col;
    if (row < 0) row = spec.lattice.rows / 2;
    if (col < 0) col = spec.lattice.cols / 2;
    if (row >= spec.lattice.rows || col >= spec.lattice.cols) {
      throw ValidationError("hotspot center outside the lattice");
    }
    const TractId center = lattice_tract_id(row, col);
    const auto pos = std::lower_bound(ids.begin(), ids.end(), center);
    if (pos == ids.end() || !(*pos == center)) {
      throw ValidationError("hotspot center not found in lattice ids");
    }
    const double delta =
        spec.hotspot_delta_sd * sample_sd(out.deprivation);
    const WeightsMatrix rook = rook_contiguity(out.geometry);
    const auto planted =
        plant_hotspot(out.deprivation, rook,
                      std::size_t(pos - ids.begin()), spec.hotspot_radius,
                      delta);
    for (std::size_t idx : planted) out.planted.push_back(ids[idx]);
  }

  ConditionTableSpec tables = default_condition_spec();
  tables.condition_noise_sd = spec.condition_noise_sd;
  tables.indicator_noise_sd = spec.indicator_noise_sd;
  tables.seed = spec.seed;
  SynthTables t = generate_condition_table(ids, out.deprivation, tables);
  out.prevalence = std::move(t.prevalence);
  out.indicators = std::move(t.indicators);
  out.clip_events = t.clip_events;
  for (const auto& wmsg : out.prevalence.warnings) out.warnings.push_back(wmsg);
  return out;
}

}  // namespace geoaff
