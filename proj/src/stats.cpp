#include "geoaff/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "geoaff/errors.hpp"

namespace geoaff {

double mean(std::span<const double> x) {
  if (x.empty()) throw NumericalError("mean of empty vector");
  double s = 0.0;
  for (double v : x) s += v;
  return s / double(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) {
    throw NumericalError("sample sd requires at least 2 observations");
  }
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / double(x.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) throw NumericalError("median of empty vector");
  const std::size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

double mad(std::span<const double> x, double center) {
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = std::abs(x[i] - center);
  return median(std::move(dev));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0) throw NumericalError("t distribution needs df > 0");
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double student_t_quantile(double q, double df) {
  if (df <= 0) throw NumericalError("t distribution needs df > 0");
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::quantile(dist, q);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw NumericalError("quantile of empty vector");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * double(sorted.size() - 1);
  const std::size_t lo = std::size_t(pos);
  const double frac = pos - double(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericalError("pearson_r length mismatch");
  if (x.size() < 2) throw NumericalError("pearson_r requires n >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericalError("pearson_r: zero-variance input");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace geoaff
