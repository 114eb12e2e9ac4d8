#include <doctest.h>

#include <sstream>

#include "geoaff/csv.hpp"
#include "geoaff/errors.hpp"
#include "geoaff/ingest.hpp"
#include "test_support.hpp"

using namespace geoaff;

namespace {

TableSchema cond_schema(std::vector<std::string> conds,
                        std::string id = "tract_id") {
  TableSchema s;
  s.id_column = std::move(id);
  for (auto& c : conds) s.value_columns.emplace_back(c, c);
  return s;
}

IndicatorSchema default_indicators() {
  IndicatorSchema s;
  s.id_column = "tract_id";
  s.columns = {
      {kPoverty, "poverty", IndicatorKind::percent},
      {kUnemployment, "unemployment", IndicatorKind::percent},
      {kCrime, "crime", IndicatorKind::index},
      {kSmoking, "smoking", IndicatorKind::percent},
      {kMalePct, "male_pct", IndicatorKind::percent},
      {kAge67Pct, "age67plus_pct", IndicatorKind::percent},
      {kPopulation, "population", IndicatorKind::count},
  };
  return s;
}

PrevalenceTable prevalence_from(const std::string& csv,
                                const TableSchema& schema,
                                bool strict = false) {
  std::istringstream in(csv);
  return parse_prevalence_csv(in, schema, strict);
}

IndicatorTable indicators_from(const std::string& csv,
                               const IndicatorSchema& schema,
                               bool strict = false) {
  std::istringstream in(csv);
  return parse_indicator_csv(in, schema, strict);
}

GeometrySet geometry_from(const std::string& text,
                          const std::string& id_property = "tract_id") {
  std::istringstream in(text);
  return parse_geometry(in, id_property);
}

std::string square_feature(const std::string& id, double x0, double y0,
                           double side = 1.0) {
  std::ostringstream f;
  const double x1 = x0 + side, y1 = y0 + side;
  f << "{\"type\":\"Feature\",\"properties\":{\"tract_id\":\"" << id
    << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" << x0 << ","
    << y0 << "],[" << x1 << "," << y0 << "],[" << x1 << "," << y1 << "],["
    << x0 << "," << y1 << "],[" << x0 << "," << y0 << "]]]}}";
  return f.str();
}

std::string collection(const std::vector<std::string>& features) {
  std::string out = "{\"type\":\"FeatureCollection\",\"features\":[";
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) out += ",";
    out += features[i];
  }
  out += "]}";
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV reader
// ---------------------------------------------------------------------------

TEST_CASE("csv reads quoted fields with commas, newlines and escaped quotes") {
  std::istringstream in(
      "a,b\n\"x,y\",\"line1\nline2\"\n\"he said \"\"hi\"\"\",plain\r\n");
  const CsvTable t = read_csv(in);
  REQUIRE(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x,y");
  CHECK(t.rows[0][1] == "line1\nline2");
  CHECK(t.rows[1][0] == "he said \"hi\"");
  CHECK(t.rows[1][1] == "plain");
}

TEST_CASE("csv rejects ragged records and unterminated quotes") {
  std::istringstream ragged("a,b\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(ragged), ValidationError);
  std::istringstream unterminated("a,b\n\"oops,2\n");
  CHECK_THROWS_AS(read_csv(unterminated), ValidationError);
}

TEST_CASE("csv without trailing newline keeps the last record") {
  std::istringstream in("a,b\n1,2");
  const CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == "2");
}

// ---------------------------------------------------------------------------
// Prevalence table
// ---------------------------------------------------------------------------

TEST_CASE("prevalence csv parses rows and conditions") {
  const auto t = prevalence_from(
      "tract_id,c1,c2,c3,c4,c5,c6\n"
      "A,1,2,3,4,5,6\n"
      "B,6,5,4,3,2,1\n",
      cond_schema({"c1", "c2", "c3", "c4", "c5", "c6"}));
  REQUIRE(t.rows.size() == 2);
  REQUIRE(t.condition_names.size() == 6);
  CHECK(*t.rows.at(TractId{"A"})[0] == 1.0);
  CHECK(*t.rows.at(TractId{"B"})[5] == 1.0);
  CHECK(t.warnings.empty());
}

TEST_CASE("unparseable prevalence cell becomes missing with one warning") {
  const auto t = prevalence_from(
      "tract_id,asthma\nA,n/a\nB,10.5\n", cond_schema({"asthma"}));
  CHECK(!t.rows.at(TractId{"A"})[0].has_value());
  CHECK(*t.rows.at(TractId{"B"})[0] == 10.5);
  CHECK(t.warnings.size() == 1);
}

TEST_CASE("duplicate tract id in prevalence csv is a hard error") {
  CHECK_THROWS_AS(prevalence_from("tract_id,c\n47157001100,1\n47157001100,2\n",
                                  cond_schema({"c"})),
                  ValidationError);
}

TEST_CASE("missing id column is a hard error naming the column") {
  try {
    prevalence_from("wrong,c\nA,1\n", cond_schema({"c"}));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("tract_id") != std::string::npos);
  }
}

TEST_CASE("prevalence out of [0,100] warns by default and throws in strict mode") {
  const auto lax = prevalence_from("tract_id,c\nA,120\nB,1\n", cond_schema({"c"}));
  CHECK(*lax.rows.at(TractId{"A"})[0] == 120.0);  // value kept
  CHECK(lax.warnings.size() == 1);
  CHECK_THROWS_AS(
      prevalence_from("tract_id,c\nA,120\nB,1\n", cond_schema({"c"}), true),
      ValidationError);
}

TEST_CASE("blank prevalence cell is silently missing") {
  const auto t = prevalence_from("tract_id,c\nA,\nB,2\n", cond_schema({"c"}));
  CHECK(!t.rows.at(TractId{"A"})[0].has_value());
  CHECK(t.warnings.empty());
}

// ---------------------------------------------------------------------------
// Indicator table
// ---------------------------------------------------------------------------

TEST_CASE("indicator csv parses and validates ranges") {
  const std::string header =
      "tract_id,poverty,unemployment,crime,smoking,male_pct,age67plus_pct,"
      "population\n";
  const auto t = indicators_from(
      header + "A,28.864,7.2,110,20,48,12,4000\nB,10,3,90,15,50,13,3500\n",
      default_indicators());
  CHECK(*t.rows.at(TractId{"A"})[0] == 28.864);
  CHECK(t.warnings.empty());

  const auto warned = indicators_from(
      header + "A,120,7.2,110,20,48,12,4000\nB,10,3,90,15,50,13,3500\n",
      default_indicators());
  CHECK(*warned.rows.at(TractId{"A"})[0] == 120.0);
  CHECK(warned.warnings.size() == 1);
}

TEST_CASE("negative population is a hard error") {
  const std::string header =
      "tract_id,poverty,unemployment,crime,smoking,male_pct,age67plus_pct,"
      "population\n";
  CHECK_THROWS_AS(
      indicators_from(header + "A,10,5,100,20,48,12,-5\n", default_indicators()),
      ValidationError);
}

TEST_CASE("non-integer population and negative crime index warn") {
  const std::string header =
      "tract_id,poverty,unemployment,crime,smoking,male_pct,age67plus_pct,"
      "population\n";
  const auto t = indicators_from(
      header + "A,10,5,-3,20,48,12,4000.5\n", default_indicators());
  CHECK(t.warnings.size() == 2);
}

// ---------------------------------------------------------------------------
// GeoJSON geometry
// ---------------------------------------------------------------------------

TEST_CASE("unit square feature parses to one closed 5-vertex ring") {
  const auto g = geometry_from(collection({square_feature("A", 0, 0)}));
  REQUIRE(g.rows.size() == 1);
  const MultiPolygon& mp = g.rows.at(TractId{"A"});
  REQUIRE(mp.parts.size() == 1);
  CHECK(mp.parts[0].exterior.size() == 5);
  CHECK(ring_is_closed(mp.parts[0].exterior));
  CHECK(g.feature_errors.empty());
  CHECK(g.warnings.empty());
}

TEST_CASE("unclosed ring is auto-closed with a warning") {
  const std::string f =
      "{\"type\":\"Feature\",\"properties\":{\"tract_id\":\"A\"},"
      "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[0,0],[1,0],[1,1],"
      "[0,1]]]}}";
  const auto g = geometry_from(collection({f}));
  REQUIRE(g.rows.size() == 1);
  CHECK(g.rows.at(TractId{"A"}).parts[0].exterior.size() == 5);
  CHECK(g.warnings.size() == 1);
}

TEST_CASE("line string feature is excluded into feature errors") {
  const std::string f =
      "{\"type\":\"Feature\",\"properties\":{\"tract_id\":\"A\"},"
      "\"geometry\":{\"type\":\"LineString\",\"coordinates\":[[0,0],[1,1]]}}";
  const auto g = geometry_from(collection({f, square_feature("B", 2, 2)}));
  CHECK(g.rows.size() == 1);
  REQUIRE(g.feature_errors.size() == 1);
  CHECK(g.feature_errors[0].id == "A");
}

TEST_CASE("missing id property is a hard error") {
  const std::string f =
      "{\"type\":\"Feature\",\"properties\":{},"
      "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[0,0],[1,0],[1,1],"
      "[0,1],[0,0]]]}}";
  CHECK_THROWS_AS(geometry_from(collection({f})), ValidationError);
}

TEST_CASE("duplicate tract ids across features are a hard error") {
  CHECK_THROWS_AS(geometry_from(collection(
                      {square_feature("A", 0, 0), square_feature("A", 5, 5)})),
                  ValidationError);
}

TEST_CASE("clockwise exterior is normalized to counter-clockwise") {
  const std::string f =
      "{\"type\":\"Feature\",\"properties\":{\"tract_id\":\"A\"},"
      "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[0,0],[0,1],[1,1],"
      "[1,0],[0,0]]]}}";
  const auto g = geometry_from(collection({f}));
  CHECK(ring_signed_area(g.rows.at(TractId{"A"}).parts[0].exterior) > 0.0);
}

TEST_CASE("self-intersecting bowtie ring is excluded") {
  const std::string f =
      "{\"type\":\"Feature\",\"properties\":{\"tract_id\":\"A\"},"
      "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[0,0],[1,1],[1,0],"
      "[0,1],[0,0]]]}}";
  const auto g = geometry_from(collection({f}));
  CHECK(g.rows.empty());
  REQUIRE(g.feature_errors.size() == 1);
}

TEST_CASE("multipolygon parses all parts") {
  const std::string f =
      "{\"type\":\"Feature\",\"properties\":{\"tract_id\":\"A\"},"
      "\"geometry\":{\"type\":\"MultiPolygon\",\"coordinates\":"
      "[[[[0,0],[1,0],[1,1],[0,1],[0,0]]],[[[3,3],[4,3],[4,4],[3,4],[3,3]]]]}}";
  const auto g = geometry_from(collection({f}));
  CHECK(g.rows.at(TractId{"A"}).parts.size() == 2);
}

TEST_CASE("feature-level id is used when id property name is empty") {
  const std::string f =
      "{\"type\":\"Feature\",\"id\":\"X\",\"properties\":{},"
      "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[0,0],[1,0],[1,1],"
      "[0,1],[0,0]]]}}";
  std::istringstream in(collection({f}));
  const auto g = parse_geometry(in, "");
  CHECK(g.rows.count(TractId{"X"}) == 1);
}

// ---------------------------------------------------------------------------
// Join
// ---------------------------------------------------------------------------

namespace {

PrevalenceTable small_prevalence(const std::vector<std::string>& ids) {
  PrevalenceTable p;
  p.condition_names = {"c1", "c2"};
  double v = 1.0;
  for (const auto& id : ids) {
    p.rows[TractId{id}] = {v, v + 1.0};
    v += 2.0;
  }
  return p;
}

IndicatorTable small_indicators(const std::vector<std::string>& ids) {
  IndicatorTable t;
  t.indicator_names = {kPoverty, kPopulation};
  t.kinds = {IndicatorKind::percent, IndicatorKind::count};
  double v = 5.0;
  for (const auto& id : ids) {
    t.rows[TractId{id}] = {v, 1000.0 + v};
    v += 1.0;
  }
  return t;
}

GeometrySet small_geometry(const std::vector<std::string>& ids) {
  std::vector<std::string> features;
  double x = 0.0;
  for (const auto& id : ids) {
    features.push_back(square_feature(id, x, 0.0));
    x += 1.0;
  }
  return geometry_from(collection(features));
}

}  // namespace

TEST_CASE("complete sources join with no drops") {
  const auto r = join_region(small_prevalence({"A", "B", "C"}),
                             small_indicators({"A", "B", "C"}),
                             small_geometry({"A", "B", "C"}));
  CHECK(r.region.size() == 3);
  CHECK(r.report.dropped.empty());
  CHECK(r.report.n_joined == 3);
  CHECK(r.region.tract_ids ==
        std::vector<TractId>{TractId{"A"}, TractId{"B"}, TractId{"C"}});
}

TEST_CASE("tract without geometry is dropped with reason under default policy") {
  const auto r = join_region(small_prevalence({"A", "B", "C"}),
                             small_indicators({"A", "B", "C"}),
                             small_geometry({"A", "C"}));
  CHECK(r.region.size() == 2);
  REQUIRE(r.report.dropped.size() == 1);
  CHECK(r.report.dropped[0].id.value == "B");
  CHECK(r.report.dropped[0].reason == "no geometry");
}

TEST_CASE("strict join errors naming the offending tract") {
  try {
    join_region(small_prevalence({"A", "B", "C"}),
                small_indicators({"A", "B", "C"}), small_geometry({"A", "C"}),
                JoinPolicy::strict);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("B") != std::string::npos);
  }
}

TEST_CASE("missing cells drop tracts with named reasons") {
  auto p = small_prevalence({"A", "B", "C", "E"});
  p.rows[TractId{"B"}][1] = std::nullopt;
  auto ind = small_indicators({"A", "B", "C", "E"});
  ind.rows[TractId{"C"}][0] = std::nullopt;
  const auto r =
      join_region(p, ind, small_geometry({"A", "B", "C", "D", "E"}));
  CHECK(r.region.size() == 2);  // A and E survive
  REQUIRE(r.report.dropped.size() == 3);
  bool saw_b = false, saw_c = false, saw_d = false;
  for (const auto& d : r.report.dropped) {
    if (d.id.value == "B") {
      saw_b = true;
      CHECK(d.reason == "missing prevalence value (c2)");
    }
    if (d.id.value == "C") {
      saw_c = true;
      CHECK(d.reason == "missing indicator value (poverty)");
    }
    if (d.id.value == "D") {
      saw_d = true;
      CHECK(d.reason == "absent from prevalence table");
    }
  }
  CHECK(saw_b);
  CHECK(saw_c);
  CHECK(saw_d);
}

TEST_CASE("join below two tracts is a hard error") {
  CHECK_THROWS_AS(join_region(small_prevalence({"A"}), small_indicators({"A"}),
                              small_geometry({"A"})),
                  ValidationError);
}

TEST_CASE("joined region is aligned and queryable") {
  const auto r = join_region(small_prevalence({"B", "A"}),
                             small_indicators({"A", "B"}),
                             small_geometry({"A", "B"}));
  const StudyRegion& region = r.region;
  // Canonical order is sorted ids regardless of source order.
  CHECK(region.tract_ids[0].value == "A");
  const auto pov = region.indicator_column(kPoverty);
  REQUIRE(pov.size() == 2);
  CHECK(pov[0] == 5.0);  // A
  CHECK(pov[1] == 6.0);  // B
  const auto c1 = region.prevalence_column(0);
  // map iteration inserted B first (value 1) then A (3); sorted puts A first
  CHECK(c1[0] == 3.0);
  CHECK(c1[1] == 1.0);
  CHECK(region.indicator_index("nope") == std::nullopt);
  CHECK_THROWS_AS(region.indicator_column("nope"), ValidationError);
}

TEST_CASE("input row order never changes the joined region") {
  // Same cell values keyed by id, fed in two different file orders.
  const std::string head = "tract_id,c1,c2\n";
  const std::string pa = "A,1,2\n", pb = "B,3,4\n", pc = "C,5,6\n";
  const std::string ihead = "tract_id,poverty,population\n";
  const std::string ia = "A,5,1005\n", ib = "B,6,1006\n", ic = "C,7,1007\n";
  IndicatorSchema ind;
  ind.id_column = "tract_id";
  ind.columns = {{kPoverty, "poverty", IndicatorKind::percent},
                 {kPopulation, "population", IndicatorKind::count}};
  const auto schema = cond_schema({"c1", "c2"});
  const auto geom_fwd = geometry_from(collection({square_feature("A", 0, 0),
                                                  square_feature("B", 1, 0),
                                                  square_feature("C", 2, 0)}));
  const auto geom_rev = geometry_from(collection({square_feature("C", 2, 0),
                                                  square_feature("B", 1, 0),
                                                  square_feature("A", 0, 0)}));
  const auto a = join_region(prevalence_from(head + pa + pb + pc, schema),
                             indicators_from(ihead + ic + ib + ia, ind),
                             geom_rev);
  const auto b = join_region(prevalence_from(head + pc + pa + pb, schema),
                             indicators_from(ihead + ia + ic + ib, ind),
                             geom_fwd);
  CHECK(a.region.tract_ids == b.region.tract_ids);
  CHECK(a.region.prevalence == b.region.prevalence);
  CHECK(a.region.indicators == b.region.indicators);
}

TEST_CASE("source counts are conserved in the validation report") {
  const auto r = join_region(small_prevalence({"A", "B"}),
                             small_indicators({"A", "B", "C"}),
                             small_geometry({"A", "B", "C", "D"}));
  CHECK(r.report.n_prevalence == 2);
  CHECK(r.report.n_indicators == 3);
  CHECK(r.report.n_geometry == 4);
  CHECK(r.report.n_joined + r.report.dropped.size() == 4);  // universe = union
}
