#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace geoaff {

double mean(std::span<const double> x);

// Sample standard deviation (N-1 denominator). Throws NumericalError if n < 2.
double sample_sd(std::span<const double> x);

// Median via copy + nth_element (average of the two middle order statistics
// for even n).
double median(std::vector<double> v);

// Median absolute deviation about `center` (not scaled to sigma).
double mad(std::span<const double> x, double center);

double normal_cdf(double z);

// Two-sided normal p-value: 2 * (1 - Phi(|z|)), computed as erfc(|z|/sqrt(2)).
double normal_two_sided_p(double z);

// Two-sided p-value from the exact Student-t distribution with df degrees of
// freedom.
double student_t_two_sided_p(double t, double df);

// Upper quantile t_{q, df} (e.g. q = 0.975 for a 95% CI half-width).
double student_t_quantile(double q, double df);

// Type-7 (linear interpolation) quantile of an ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Pearson correlation; throws NumericalError naming nothing if either vector
// has zero variance (callers attach variable names).
double pearson_r(std::span<const double> x, std::span<const double> y);

}  // namespace geoaff
