#include "geoaff/affinity.hpp"

#include <algorithm>
#include <cmath>

#include "geoaff/errors.hpp"
#include "geoaff/stats.hpp"

namespace geoaff {

std::vector<double> condition_thresholds(const StudyRegion& region) {
  const std::size_t n = region.size();
  if (n == 0) throw ValidationError("empty region");
  const std::size_t k_count = region.condition_names.size();
  std::vector<double> thresholds(k_count, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += region.prevalence[i][k];
    thresholds[k] = s / double(n);
  }
  return thresholds;
}

std::vector<std::vector<std::uint8_t>> exceedance_flags(
    const StudyRegion& region, const std::vector<double>& thresholds) {
  if (thresholds.size() != region.condition_names.size()) {
    throw ValidationError("thresholds length does not match condition count");
  }
  const std::size_t n = region.size();
  std::vector<std::vector<std::uint8_t>> flags(
      n, std::vector<std::uint8_t>(thresholds.size(), 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      flags[i][k] = region.prevalence[i][k] > thresholds[k] ? 1 : 0;
    }
  }
  return flags;
}

AffinityResult affinity_scores(const StudyRegion& region) {
  AffinityResult out;
  out.thresholds = condition_thresholds(region);
  out.flags = exceedance_flags(region, out.thresholds);
  const std::size_t n = region.size();
  const int k_count = int(region.condition_names.size());
  out.score.resize(n, 0);
  std::size_t at_max = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int s = 0;
    for (std::uint8_t f : out.flags[i]) s += f;
    out.score[i] = s;
    if (s == k_count) ++at_max;
  }
  out.share_max = n == 0 ? 0.0 : double(at_max) / double(n);
  return out;
}

DescriptiveStats descriptive_stats(const StudyRegion& region) {
  if (region.size() < 2) {
    throw NumericalError("descriptive stats require at least 2 tracts");
  }
  DescriptiveStats out;
  auto add = [&](const std::string& name, const std::vector<double>& col) {
    VariableStats vs;
    vs.name = name;
    vs.mean = mean(col);
    vs.sd = sample_sd(col);
    vs.min = *std::min_element(col.begin(), col.end());
    vs.max = *std::max_element(col.begin(), col.end());
    vs.n = col.size();
    out.variables.push_back(vs);
  };
  for (std::size_t k = 0; k < region.condition_names.size(); ++k) {
    add(region.condition_names[k], region.prevalence_column(k));
  }
  add("affinity", resolve_variable(region, "affinity"));
  for (const std::string& name : region.indicator_names) {
    add(name, region.indicator_column(name));
  }
  return out;
}

std::vector<double> resolve_variable(const StudyRegion& region,
                                     const std::string& name) {
  if (name == "affinity") {
    const AffinityResult aff = affinity_scores(region);
    std::vector<double> col(aff.score.size());
    for (std::size_t i = 0; i < aff.score.size(); ++i) {
      col[i] = double(aff.score[i]);
    }
    return col;
  }
  for (std::size_t k = 0; k < region.condition_names.size(); ++k) {
    if (region.condition_names[k] == name) return region.prevalence_column(k);
  }
  if (region.indicator_index(name)) return region.indicator_column(name);
  throw ValidationError("unknown variable '" + name + "'");
}

CorrelationMatrix correlation_matrix(const StudyRegion& region,
                                     const std::vector<std::string>& variables) {
  const std::size_t n = region.size();
  if (n < 3) throw NumericalError("correlation p-values require N >= 3");
  CorrelationMatrix out;
  out.names = variables;
  std::vector<std::vector<double>> cols;
  cols.reserve(variables.size());
  for (const std::string& name : variables) {
    std::vector<double> col = resolve_variable(region, name);
    const double m = mean(col);
    double ss = 0.0;
    for (double v : col) ss += (v - m) * (v - m);
    if (ss == 0.0) {
      throw NumericalError("variable '" + name + "' has zero variance");
    }
    cols.push_back(std::move(col));
  }
  const std::size_t m = variables.size();
  out.r.assign(m, std::vector<double>(m, 1.0));
  out.p.assign(m, std::vector<double>(m, 0.0));
  const double df = double(n) - 2.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double r = pearson_r(cols[a], cols[b]);
      double p;
      if (1.0 - r * r <= 0.0) {
        p = 0.0;  // |r| == 1: t diverges
      } else {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        p = student_t_two_sided_p(t, df);
      }
      out.r[a][b] = out.r[b][a] = r;
      out.p[a][b] = out.p[b][a] = p;
    }
  }
  return out;
}

}  // namespace geoaff
