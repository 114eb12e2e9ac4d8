#include "geoaff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <set>
#include <sstream>

#include "geoaff/errors.hpp"
#include "geoaff/jsonio.hpp"

namespace geoaff {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_quotes = !in_quotes;
    if (c == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& value, int line_no) {
  if (value.size() < 2 || value.back() != '"') {
    throw ValidationError("config line " + std::to_string(line_no) +
                          ": unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < value.size(); ++i) {
    if (value[i] == '\\') {
      if (i + 2 >= value.size()) {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": dangling escape");
      }
      const char next = value[i + 1];
      if (next != '"' && next != '\\') {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": unsupported escape \\" + std::string(1, next));
      }
      out.push_back(next);
      ++i;
    } else if (value[i] == '"') {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": stray quote inside string");
    } else {
      out.push_back(value[i]);
    }
  }
  return out;
}

}  // namespace

ConfigFile parse_config_text(const std::string& text) {
  ConfigFile file;
  file.raw = text;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": empty section name");
      }
      if (file.sections.find(section) != file.sections.end()) {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": duplicate section [" + section + "]");
      }
      file.sections[section];  // a section may be empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    if (section.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": key outside any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": empty key");
    }
    if (!value.empty() && value.front() == '"') {
      value = unquote(value, line_no);
    }
    auto [it, inserted] = file.sections[section].emplace(key, value);
    (void)it;
    if (!inserted) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": duplicate key '" + section + "." + key + "'");
    }
  }
  return file;
}

ConfigFile load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::string config_hash(const std::string& raw_bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : raw_bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

TableSchema SchemaSpec::prevalence_schema() const {
  TableSchema s;
  s.id_column = prevalence_id;
  for (const auto& c : condition_columns) s.value_columns.emplace_back(c, c);
  return s;
}

IndicatorSchema SchemaSpec::indicator_schema() const {
  IndicatorSchema s;
  s.id_column = indicator_id;
  s.columns = {
      {kPoverty, poverty_column, IndicatorKind::percent},
      {kUnemployment, unemployment_column, IndicatorKind::percent},
      {kCrime, crime_column, IndicatorKind::index},
      {kSmoking, smoking_column, IndicatorKind::percent},
      {kMalePct, male_column, IndicatorKind::percent},
      {kAge67Pct, age67_column, IndicatorKind::percent},
      {kPopulation, population_column, IndicatorKind::count},
  };
  return s;
}

namespace {

class SectionReader {
 public:
  SectionReader(const ConfigFile& file, const std::string& section)
      : section_(section) {
    const auto it = file.sections.find(section);
    if (it != file.sections.end()) entries_ = &it->second;
  }

  bool present() const { return entries_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!entries_) return std::nullopt;
    const auto it = entries_->find(key);
    if (it == entries_->end()) return std::nullopt;
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    const auto v = raw(key);
    return v ? *v : fallback;
  }

  double get_double(const std::string& key, double fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    return parse_double(*v, key);
  }

  int get_int(const std::string& key, int fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    const double d = parse_double(*v, key);
    const int i = int(d);
    if (double(i) != d) {
      throw ValidationError("config " + section_ + "." + key +
                            ": expected an integer");
    }
    return i;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const char* b = v->data();
    const char* e = b + v->size();
    const auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc() || res.ptr != e) {
      throw ValidationError("config " + section_ + "." + key +
                            ": expected an unsigned integer");
    }
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw ValidationError("config " + section_ + "." + key +
                          ": expected true or false");
  }

  std::vector<std::string> get_list(const std::string& key) {
    const auto v = raw(key);
    std::vector<std::string> out;
    if (!v) return out;
    std::string cur;
    for (char c : *v) {
      if (c == ',') {
        const std::string t = trim(cur);
        if (!t.empty()) out.push_back(t);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
  }

  // Every key must have been asked for; leftovers are typos.
  void finish() const {
    if (!entries_) return;
    for (const auto& [key, value] : *entries_) {
      (void)value;
      if (!seen_.count(key)) {
        throw ValidationError("config: unknown key '" + section_ + "." + key + "'");
      }
    }
  }

 private:
  double parse_double(const std::string& v, const std::string& key) const {
    double out = 0.0;
    const char* b = v.data();
    const char* e = b + v.size();
    const auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc() || res.ptr != e) {
      throw ValidationError("config " + section_ + "." + key +
                            ": expected a number, got '" + v + "'");
    }
    return out;
  }

  std::string section_;
  const std::map<std::string, std::string>* entries_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_run_config(const ConfigFile& file) {
  static const std::set<std::string> known_sections{
      "input", "schema", "synth", "weights", "inference",
      "regression", "output", "join"};
  for (const auto& [name, entries] : file.sections) {
    (void)entries;
    if (!known_sections.count(name)) {
      throw ValidationError("config: unknown section [" + name + "]");
    }
  }

  RunConfig config;
  config.hash = config_hash(file.raw);

  SectionReader input(file, "input");
  if (input.present()) {
    InputFiles in;
    in.prevalence_csv = input.get_string("prevalence", "");
    in.indicators_csv = input.get_string("indicators", "");
    in.geometry_geojson = input.get_string("geometry", "");
    in.id_property = input.get_string("id_property", in.id_property);
    if (in.prevalence_csv.empty() || in.indicators_csv.empty() ||
        in.geometry_geojson.empty()) {
      throw ValidationError(
          "config [input] requires prevalence, indicators and geometry paths");
    }
    config.input = std::move(in);
  }
  input.finish();

  SectionReader synth(file, "synth");
  if (synth.present()) {
    ScenarioSpec s;
    s.lattice.rows = synth.get_int("rows", s.lattice.rows);
    s.lattice.cols = synth.get_int("cols", s.lattice.cols);
    s.lattice.cell_size = synth.get_double("cell_size", s.lattice.cell_size);
    s.rho = synth.get_double("rho", s.rho);
    s.sigma = synth.get_double("sigma", s.sigma);
    s.hotspot = synth.get_bool("hotspot", s.hotspot);
    s.hotspot_row = synth.get_int("hotspot_row", s.hotspot_row);
    s.hotspot_col = synth.get_int("hotspot_col", s.hotspot_col);
    s.hotspot_radius = synth.get_int("hotspot_radius", s.hotspot_radius);
    s.hotspot_delta_sd = synth.get_double("hotspot_delta_sd", s.hotspot_delta_sd);
    s.condition_noise_sd =
        synth.get_double("condition_noise_sd", s.condition_noise_sd);
    s.indicator_noise_sd =
        synth.get_double("indicator_noise_sd", s.indicator_noise_sd);
    if (!(std::abs(s.rho) < 1.0)) {
      throw ValidationError("config synth.rho must satisfy |rho| < 1");
    }
    if (!(s.sigma > 0.0)) {
      throw ValidationError("config synth.sigma must be positive");
    }
    if (s.lattice.rows < 1 || s.lattice.cols < 1 ||
        s.lattice.rows * s.lattice.cols < 4) {
      throw ValidationError("config synth lattice requires rows*cols >= 4");
    }
    if (s.hotspot_radius < 0) {
      throw ValidationError("config synth.hotspot_radius must be >= 0");
    }
    config.synth = s;
  }
  synth.finish();

  if (config.input.has_value() == config.synth.has_value()) {
    throw ValidationError(
        "config must declare exactly one of [input] and [synth]");
  }

  SectionReader schema(file, "schema");
  if (schema.present() && config.synth) {
    throw ValidationError("config [schema] applies only to [input] runs");
  }
  {
    SchemaSpec& s = config.schema;
    s.prevalence_id = schema.get_string("prevalence_id", s.prevalence_id);
    const auto conditions = schema.get_list("conditions");
    if (!conditions.empty()) s.condition_columns = conditions;
    s.indicator_id = schema.get_string("indicator_id", s.indicator_id);
    s.poverty_column = schema.get_string("poverty_column", s.poverty_column);
    s.unemployment_column =
        schema.get_string("unemployment_column", s.unemployment_column);
    s.crime_column = schema.get_string("crime_column", s.crime_column);
    s.smoking_column = schema.get_string("smoking_column", s.smoking_column);
    s.male_column = schema.get_string("male_column", s.male_column);
    s.age67_column = schema.get_string("age67_column", s.age67_column);
    s.population_column =
        schema.get_string("population_column", s.population_column);
    s.strict_ranges = schema.get_bool("strict_ranges", s.strict_ranges);
    if (config.input && s.condition_columns.empty()) {
      throw ValidationError(
          "config schema.conditions must list the condition columns");
    }
  }
  schema.finish();

  SectionReader weights(file, "weights");
  {
    WeightsSpec& w = config.weights;
    w.kind = weights.get_string("kind", w.kind);
    w.snap_tol = weights.get_double("snap_tol", w.snap_tol);
    w.k = std::size_t(weights.get_int("k", int(w.k)));
    w.distance = weights.get_double("distance", w.distance);
    w.row_standardize = weights.get_bool("row_standardize", w.row_standardize);
    w.gi_kind = weights.get_string("gi_kind", w.gi_kind);
    w.gi_distance = weights.get_double("gi_distance", w.gi_distance);
    static const std::set<std::string> kinds{"queen", "rook", "knn",
                                             "distance_band"};
    if (!kinds.count(w.kind)) {
      throw ValidationError("config weights.kind must be one of queen, rook, "
                            "knn, distance_band");
    }
    static const std::set<std::string> gi_kinds{"distance_band", "queen_self",
                                                "rook_self"};
    if (!gi_kinds.count(w.gi_kind)) {
      throw ValidationError("config weights.gi_kind must be one of "
                            "distance_band, queen_self, rook_self");
    }
    if (w.snap_tol < 0.0 || w.distance < 0.0 || w.gi_distance < 0.0) {
      throw ValidationError("config weights distances must be >= 0");
    }
    if (w.kind == "knn" && w.k == 0) {
      throw ValidationError("config weights.k must be >= 1");
    }
  }
  weights.finish();

  SectionReader inference(file, "inference");
  {
    InferenceSpec& inf = config.inference;
    inf.n_perm = inference.get_int("n_perm", inf.n_perm);
    if (inf.n_perm != 0 && inf.n_perm < 99) {
      throw ValidationError("config inference.n_perm must be 0 or >= 99");
    }
    const auto alphas = inference.get_list("alphas");
    if (!alphas.empty()) {
      if (alphas.size() != 3) {
        throw ValidationError("config inference.alphas must list 3 levels");
      }
      for (std::size_t i = 0; i < 3; ++i) {
        double v = 0.0;
        const char* b = alphas[i].data();
        const char* e = b + alphas[i].size();
        const auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc() || res.ptr != e) {
          throw ValidationError("config inference.alphas: bad number '" +
                                alphas[i] + "'");
        }
        inf.alphas[i] = v;
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(inf.alphas[i] > 0.0 && inf.alphas[i] < 1.0)) {
        throw ValidationError("config inference.alphas must lie in (0, 1)");
      }
      if (i > 0 && !(inf.alphas[i] < inf.alphas[i - 1])) {
        throw ValidationError(
            "config inference.alphas must be strictly descending");
      }
    }
    if (const auto s = inference.raw("seed")) {
      std::uint64_t out = 0;
      const char* b = s->data();
      const char* e = b + s->size();
      const auto res = std::from_chars(b, e, out);
      if (res.ec != std::errc() || res.ptr != e) {
        throw ValidationError("config inference.seed: expected an unsigned "
                              "integer");
      }
      config.seed = out;
    }
  }
  inference.finish();

  SectionReader regression(file, "regression");
  {
    IrlsConfig& r = config.irls;
    r.huber_c = regression.get_double("huber_c", r.huber_c);
    r.bisquare_c = regression.get_double("bisquare_c", r.bisquare_c);
    r.tol = regression.get_double("tol", r.tol);
    r.max_iter = regression.get_int("max_iter", r.max_iter);
    if (r.huber_c <= 0.0 || r.bisquare_c <= 0.0 || r.tol <= 0.0 ||
        r.max_iter < 1) {
      throw ValidationError("config [regression] tuning values must be "
                            "positive (max_iter >= 1)");
    }
  }
  regression.finish();

  SectionReader output(file, "output");
  {
    OutputSpec& o = config.output;
    o.dir = output.get_string("dir", o.dir);
    o.write_weights = output.get_bool("write_weights", o.write_weights);
    o.svg_bins = output.get_int("svg_bins", o.svg_bins);
    if (o.svg_bins < 2 || o.svg_bins > 7) {
      throw ValidationError("config output.svg_bins must be between 2 and 7");
    }
  }
  output.finish();

  SectionReader join(file, "join");
  {
    const std::string policy = join.get_string("policy", "drop_incomplete");
    if (policy == "drop_incomplete") {
      config.join_policy = JoinPolicy::drop_incomplete;
    } else if (policy == "strict") {
      config.join_policy = JoinPolicy::strict;
    } else {
      throw ValidationError(
          "config join.policy must be drop_incomplete or strict");
    }
  }
  join.finish();

  return config;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(load_config_file(path));
}

void require_seed(const RunConfig& config) {
  if (config.seed) return;
  if (config.synth) {
    throw ValidationError(
        "a seed is required for synthesis: set inference.seed or pass --seed");
  }
  if (config.inference.n_perm > 0) {
    throw ValidationError(
        "a seed is required when n_perm > 0: set inference.seed or pass "
        "--seed (or set n_perm = 0)");
  }
}

}  // namespace geoaff
