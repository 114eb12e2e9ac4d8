#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoaff/weights.hpp"

namespace geoaff {

struct MoranResult {
  double i = 0.0;
  double expected = 0.0;   // -1 / (N - 1)
  double variance = 0.0;   // analytic, randomization assumption
  double z = 0.0;
  double p_analytic = 0.0; // two-sided normal
  std::optional<double> p_permutation;
  int n_perm = 0;
  std::uint64_t seed = 0;
};

// Global Moran's I with analytic moments under the randomization assumption
// (weight sums S0/S1/S2 and the kurtosis term b2). Preconditions: weights
// without self loops, N >= 4 (the randomization variance divides by
// (N-1)(N-2)(N-3)), x not constant, at least one non-island tract.
MoranResult morans_i(std::span<const double> x, const WeightsMatrix& w);

// Adds a permutation pseudo p-value over n_perm >= 99 random relabelings of x
// (weights fixed): p = (1 + #{|I* - E| >= |I - E|}) / (n_perm + 1).
// Replicate r draws its shuffle from Rng(seed, r + 1), so results are
// byte-identical for any thread count.
MoranResult morans_i_permutation(std::span<const double> x,
                                 const WeightsMatrix& w, int n_perm,
                                 std::uint64_t seed, int threads = 1);

enum class HotspotCategory : int {
  hot99,
  hot95,
  hot90,
  notsig,
  cold90,
  cold95,
  cold99,
};

const char* to_string(HotspotCategory c);

inline constexpr std::array<double, 3> kAlphaLevels{0.10, 0.05, 0.01};

struct HotSpotResult {
  std::vector<double> gi_z;
  std::vector<double> p;                  // two-sided normal
  std::vector<HotspotCategory> category;  // filled by classify_*, empty here
  std::array<double, 3> alpha_levels = kAlphaLevels;
  std::vector<std::string> warnings;
};

// Getis-Ord Gi* z-scores. Precondition: w.includes_self (the star variant).
// Global mean and POPULATION sd include tract i itself. A tract whose
// neighborhood spans the entire region has an undefined z; it is reported as
// 0 with a warning.
HotSpotResult getis_ord_gi_star(std::span<const double> x,
                                const WeightsMatrix& w, int threads = 1);

// Benjamini-Hochberg step-up: true for every index whose p-value survives
// FDR control at `alpha` over the full vector.
std::vector<bool> bh_reject(std::span<const double> p, double alpha);

// Category per tract from the strictest alpha at which its BH-adjusted
// two-sided p survives, signed by z. alphas must be descending (lenient to
// strict), the default (0.10, 0.05, 0.01).
std::vector<HotspotCategory> fdr_classify(
    std::span<const double> z, std::array<double, 3> alphas = kAlphaLevels);

// Same classification but on raw per-tract thresholds (p <= alpha), no
// multiplicity control.
std::vector<HotspotCategory> raw_classify(
    std::span<const double> z, std::array<double, 3> alphas = kAlphaLevels);

}  // namespace geoaff
