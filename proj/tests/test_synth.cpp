#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "geoaff/errors.hpp"
#include "geoaff/rng.hpp"
#include "geoaff/spatial.hpp"
#include "geoaff/stats.hpp"
#include "geoaff/synth.hpp"
#include "geoaff/weights.hpp"
#include "test_support.hpp"

using namespace geoaff;

// ---------------------------------------------------------------------------
// Lattice geometry
// ---------------------------------------------------------------------------

TEST_CASE("lattice cells are closed unit squares with grid ids") {
  const auto g = generate_lattice_region(LatticeSpec{3, 4, 2.0});
  CHECK(g.rows.size() == 12);
  CHECK(lattice_tract_id(1, 3).value == "r1c3");
  const auto& mp = g.rows.at(TractId{"r1c3"});
  REQUIRE(mp.parts.size() == 1);
  const auto& ring = mp.parts[0].exterior;
  REQUIRE(ring.size() == 5);
  CHECK(ring_is_closed(ring));
  CHECK(ring_signed_area(ring) == doctest::Approx(4.0).epsilon(1e-12));  // 2x2
  const auto b = multipolygon_bounds(mp);
  CHECK(b.min_x == doctest::Approx(6.0).epsilon(1e-12));  // col 3 * size 2
  CHECK(b.min_y == doctest::Approx(2.0).epsilon(1e-12));  // row 1 * size 2
}

TEST_CASE("a lattice needs at least four cells") {
  CHECK_THROWS_AS(generate_lattice_region(LatticeSpec{1, 3, 1.0}),
                  ValidationError);
  CHECK_NOTHROW(generate_lattice_region(LatticeSpec{2, 2, 1.0}));
}

// ---------------------------------------------------------------------------
// SAR field
// ---------------------------------------------------------------------------

TEST_CASE("sar with rho zero returns the raw innovations from stream zero") {
  const auto g = generate_lattice_region(LatticeSpec{4, 4, 1.0});
  const auto w = row_standardize(queen_contiguity(g));
  const auto x = generate_sar_field(w, SarSpec{0.0, 1.0, 99});
  Rng rng(99, 0);
  for (const double v : x) {
    CHECK(v == doctest::Approx(rng.normal()).epsilon(1e-12));
  }
}

TEST_CASE("sar output solves its defining equation") {
  const auto g = generate_lattice_region(LatticeSpec{6, 5, 1.0});
  const auto w = row_standardize(queen_contiguity(g));
  const double rho = 0.6;
  const auto x = generate_sar_field(w, SarSpec{rho, 2.0, 1234});
  // Recompute eps = x - rho W x through the dense oracle and compare with
  // the generator's own innovation stream.
  const auto dense = testsupport::dense_from(w);
  Rng rng(1234, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lag = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lag += dense[i][j] * x[j];
    const double eps = 2.0 * rng.normal();
    CHECK(x[i] - rho * lag == doctest::Approx(eps).epsilon(1e-8));
  }
}

TEST_CASE("sar is deterministic in the seed") {
  const auto g = generate_lattice_region(LatticeSpec{5, 5, 1.0});
  const auto w = row_standardize(queen_contiguity(g));
  const auto a = generate_sar_field(w, SarSpec{0.4, 1.0, 7});
  const auto b = generate_sar_field(w, SarSpec{0.4, 1.0, 7});
  const auto c = generate_sar_field(w, SarSpec{0.4, 1.0, 8});
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("sar rejects bad inputs") {
  const auto g = generate_lattice_region(LatticeSpec{3, 3, 1.0});
  const auto w = row_standardize(queen_contiguity(g));
  CHECK_THROWS_AS(generate_sar_field(w, SarSpec{1.0, 1.0, 1}),
                  ValidationError);
  CHECK_THROWS_AS(generate_sar_field(w, SarSpec{-1.2, 1.0, 1}),
                  ValidationError);
  CHECK_THROWS_AS(generate_sar_field(w, SarSpec{0.3, 0.0, 1}),
                  ValidationError);
  // Islands make the marginal structure ill-defined for the study design.
  const std::vector<Point> pts{{0, 0}, {1, 0}, {50, 50}};
  const auto wi = distance_band_weights(pts, 1.5, false);
  CHECK(!wi.islands.empty());
  CHECK_THROWS_AS(generate_sar_field(wi, SarSpec{0.3, 1.0, 1}),
                  ValidationError);
}

TEST_CASE("positive rho induces detectable positive autocorrelation") {
  const auto g = generate_lattice_region(LatticeSpec{12, 12, 1.0});
  const auto w = row_standardize(queen_contiguity(g));
  const auto x = generate_sar_field(w, SarSpec{0.7, 1.0, 21});
  const auto m = morans_i(x, w);
  CHECK(m.i > m.expected);
  CHECK(m.z > 2.0);
}

// ---------------------------------------------------------------------------
// Hotspot planting
// ---------------------------------------------------------------------------

TEST_CASE("a radius-2 rook ball in the interior holds 13 cells") {
  const auto g = generate_lattice_region(LatticeSpec{5, 5, 1.0});
  const auto ids = g.sorted_ids();
  const auto graph = rook_contiguity(g);
  std::size_t center = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto [r, c] = testsupport::parse_rc(ids[i]);
    if (r == 2 && c == 2) center = i;
  }
  std::vector<double> x(25, 0.0);
  const auto planted = plant_hotspot(x, graph, center, 2, 5.0);
  CHECK(planted.size() == 13);
  CHECK(std::is_sorted(planted.begin(), planted.end()));
  // Independent route: Manhattan distance on parsed ids.
  std::set<std::size_t> expected;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto [r, c] = testsupport::parse_rc(ids[i]);
    if (std::abs(r - 2) + std::abs(c - 2) <= 2) expected.insert(i);
  }
  CHECK(std::set<std::size_t>(planted.begin(), planted.end()) == expected);
  // The bump landed exactly on the ball.
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i] == (expected.count(i) ? 5.0 : 0.0));
  }
}

TEST_CASE("radius zero plants only the center") {
  const auto g = generate_lattice_region(LatticeSpec{3, 3, 1.0});
  const auto graph = rook_contiguity(g);
  std::vector<double> x(9, 1.0);
  const auto planted = plant_hotspot(x, graph, 4, 0, 2.5);
  CHECK(planted == std::vector<std::size_t>{4});
  CHECK(x[4] == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("planting validates its inputs") {
  const auto g = generate_lattice_region(LatticeSpec{3, 3, 1.0});
  const auto graph = rook_contiguity(g);
  std::vector<double> x(9, 0.0);
  CHECK_THROWS_AS(plant_hotspot(x, graph, 99, 1, 1.0), ValidationError);
  CHECK_THROWS_AS(plant_hotspot(x, graph, 0, -1, 1.0), ValidationError);
  std::vector<double> wrong(5, 0.0);
  CHECK_THROWS_AS(plant_hotspot(wrong, graph, 0, 1, 1.0), ValidationError);
}

TEST_CASE("a corner ball is clipped by the lattice boundary") {
  const auto g = generate_lattice_region(LatticeSpec{4, 4, 1.0});
  const auto ids = g.sorted_ids();
  const auto graph = rook_contiguity(g);
  std::size_t corner = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].value == "r0c0") corner = i;
  }
  std::vector<double> x(16, 0.0);
  const auto planted = plant_hotspot(x, graph, corner, 1, 1.0);
  CHECK(planted.size() == 3);  // r0c0, r0c1, r1c0
}

// ---------------------------------------------------------------------------
// Condition and indicator tables
// ---------------------------------------------------------------------------

namespace {

std::vector<TractId> simple_ids(std::size_t n) {
  std::vector<TractId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%04zu", i);
    ids.push_back(TractId{buf});
  }
  return ids;
}

std::vector<double> smooth_field(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 17);
  std::vector<double> f(n);
  for (double& v : f) v = rng.normal();
  return f;
}

}  // namespace

TEST_CASE("zero noise and a positive loading give a perfect correlation") {
  const auto ids = simple_ids(60);
  const auto dep = smooth_field(60, 5);
  auto spec = default_condition_spec();
  spec.condition_noise_sd = 0.0;
  spec.indicator_noise_sd = 0.0;
  spec.seed = 9;
  const auto t = generate_condition_table(ids, dep, spec);
  REQUIRE(t.prevalence.condition_names.size() == spec.base.size());
  // Every condition column is exactly affine in deprivation.
  std::vector<double> col(ids.size());
  for (std::size_t k = 0; k < spec.base.size(); ++k) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      col[i] = *t.prevalence.rows.at(ids[i])[k];
    }
    CHECK(pearson_r(col, dep) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("zero loadings decouple conditions from the field") {
  const auto ids = simple_ids(400);
  const auto dep = smooth_field(400, 6);
  ConditionTableSpec spec;
  spec.base = {30.0, 20.0};
  spec.loadings = {0.0, 0.0};
  spec.condition_noise_sd = 2.0;
  spec.seed = 10;
  const auto t = generate_condition_table(ids, dep, spec);
  std::vector<double> col(ids.size());
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      col[i] = *t.prevalence.rows.at(ids[i])[k];
    }
    CHECK(std::fabs(pearson_r(col, dep)) < 0.2);
  }
}

TEST_CASE("default spec produces a moderate-to-strong deprivation gradient") {
  for (const std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto ids = simple_ids(300);
    const auto dep = smooth_field(300, seed);
    auto spec = default_condition_spec();
    spec.seed = seed * 100;
    const auto t = generate_condition_table(ids, dep, spec);
    std::vector<double> col(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      col[i] = *t.prevalence.rows.at(ids[i])[0];
    }
    const double r = pearson_r(col, dep);
    CHECK(r > 0.3);
    CHECK(r < 0.98);
  }
}

TEST_CASE("tables stay in range and count their clips") {
  const auto ids = simple_ids(200);
  auto dep = smooth_field(200, 7);
  for (double& v : dep) v *= 30.0;  // wild field forces clipping
  auto spec = default_condition_spec();
  spec.seed = 11;
  const auto t = generate_condition_table(ids, dep, spec);
  CHECK(t.clip_events > 0);
  const std::size_t cells =
      ids.size() * (spec.base.size() + t.indicators.indicator_names.size());
  if (t.clip_events > cells / 100) {
    CHECK(!t.prevalence.warnings.empty());
    CHECK(!t.indicators.warnings.empty());
  }
  for (const auto& id : ids) {
    for (const auto& cell : t.prevalence.rows.at(id)) {
      REQUIRE(cell.has_value());
      CHECK(*cell >= 0.0);
      CHECK(*cell <= 100.0);
    }
  }
}

TEST_CASE("population is an integer count with a floor") {
  const auto ids = simple_ids(150);
  const auto dep = smooth_field(150, 8);
  auto spec = default_condition_spec();
  spec.seed = 12;
  const auto t = generate_condition_table(ids, dep, spec);
  std::size_t pop_col = 0;
  bool found = false;
  for (std::size_t k = 0; k < t.indicators.indicator_names.size(); ++k) {
    if (t.indicators.indicator_names[k] == kPopulation) {
      pop_col = k;
      found = true;
    }
  }
  REQUIRE(found);
  for (const auto& id : ids) {
    const double v = *t.indicators.rows.at(id)[pop_col];
    CHECK(v >= 50.0);
    CHECK(v == std::floor(v));
  }
}

TEST_CASE("table generation is deterministic and seed-sensitive") {
  const auto ids = simple_ids(50);
  const auto dep = smooth_field(50, 13);
  auto spec = default_condition_spec();
  spec.seed = 14;
  const auto a = generate_condition_table(ids, dep, spec);
  const auto b = generate_condition_table(ids, dep, spec);
  CHECK(a.prevalence.rows == b.prevalence.rows);
  CHECK(a.indicators.rows == b.indicators.rows);
  spec.seed = 15;
  const auto c = generate_condition_table(ids, dep, spec);
  CHECK(a.prevalence.rows != c.prevalence.rows);
}

TEST_CASE("mismatched spec vectors are rejected") {
  const auto ids = simple_ids(10);
  const auto dep = smooth_field(10, 1);
  ConditionTableSpec spec;
  spec.base = {10.0, 20.0};
  spec.loadings = {1.0};  // wrong length
  CHECK_THROWS_AS(generate_condition_table(ids, dep, spec), ValidationError);
}

// ---------------------------------------------------------------------------
// Whole scenarios
// ---------------------------------------------------------------------------

TEST_CASE("a scenario bundles geometry, tables and the latent field") {
  ScenarioSpec spec;
  spec.lattice = {8, 8, 1.0};
  spec.seed = 4242;
  const auto sc = generate_scenario(spec);
  CHECK(sc.geometry.rows.size() == 64);
  CHECK(sc.prevalence.rows.size() == 64);
  CHECK(sc.indicators.rows.size() == 64);
  CHECK(sc.deprivation.size() == 64);
  CHECK(sc.planted.empty());
  // Every cell of both tables is present (no missing values).
  for (const auto& [id, cells] : sc.prevalence.rows) {
    for (const auto& c : cells) CHECK(c.has_value());
  }
  for (const auto& [id, cells] : sc.indicators.rows) {
    for (const auto& c : cells) CHECK(c.has_value());
  }
  // The scenario joins into a clean study region with no drops.
  const auto joined = join_region(sc.prevalence, sc.indicators, sc.geometry);
  CHECK(joined.report.dropped.empty());
  CHECK(joined.region.size() == 64);
}

TEST_CASE("scenario hotspot raises the planted tracts") {
  ScenarioSpec spec;
  spec.lattice = {10, 10, 1.0};
  spec.hotspot = true;
  spec.hotspot_radius = 2;
  spec.seed = 31337;
  const auto sc = generate_scenario(spec);
  REQUIRE(sc.planted.size() == 13);  // interior rook ball of radius 2
  CHECK(std::is_sorted(sc.planted.begin(), sc.planted.end()));
  const auto g = generate_lattice_region(spec.lattice);
  const auto ids = g.sorted_ids();
  std::set<TractId> planted(sc.planted.begin(), sc.planted.end());
  double in_sum = 0.0, out_sum = 0.0;
  std::size_t in_n = 0, out_n = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (planted.count(ids[i])) {
      in_sum += sc.deprivation[i];
      ++in_n;
    } else {
      out_sum += sc.deprivation[i];
      ++out_n;
    }
  }
  // The bump is 3x the field sd (~1), minus sampling noise in the ball mean.
  CHECK(in_sum / double(in_n) > out_sum / double(out_n) + 1.5);
}

TEST_CASE("explicit hotspot center lands where asked") {
  ScenarioSpec spec;
  spec.lattice = {6, 6, 1.0};
  spec.hotspot = true;
  spec.hotspot_row = 0;
  spec.hotspot_col = 0;
  spec.hotspot_radius = 1;
  spec.seed = 5;
  const auto sc = generate_scenario(spec);
  REQUIRE(sc.planted.size() == 3);  // corner ball: the cell plus two sides
  std::set<std::string> got;
  for (const auto& id : sc.planted) got.insert(id.value);
  CHECK(got == std::set<std::string>{"r0c0", "r0c1", "r1c0"});
}

TEST_CASE("scenarios are reproducible from the seed") {
  ScenarioSpec spec;
  spec.lattice = {7, 7, 1.0};
  spec.hotspot = true;
  spec.seed = 999;
  const auto a = generate_scenario(spec);
  const auto b = generate_scenario(spec);
  CHECK(a.deprivation == b.deprivation);
  CHECK(a.prevalence.rows == b.prevalence.rows);
  CHECK(a.indicators.rows == b.indicators.rows);
  CHECK(a.planted == b.planted);
}
