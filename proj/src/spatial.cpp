#include "geoaff/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geoaff/errors.hpp"
#include "geoaff/parallel.hpp"
#include "geoaff/rng.hpp"
#include "geoaff/stats.hpp"

namespace geoaff {

namespace {

// Plain evaluation of I = (N / W_sum) * sum_ij w_ij d_i d_j / sum_i d_i^2
// for deviations d = x - mean(x). Shared by the analytic path and every
// permutation replicate.
double moran_statistic(std::span<const double> x, const WeightsMatrix& w,
                       double w_sum) {
  const std::size_t n = x.size();
  double m = 0.0;
  for (double v : x) m += v;
  m /= double(n);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = x[i] - m;
    for (const Neighbor& nb : w.neighbors[i]) {
      num += nb.weight * di * (x[nb.index] - m);
    }
  }
  return (double(n) / w_sum) * num / denom;
}

void check_moran_inputs(std::span<const double> x, const WeightsMatrix& w) {
  if (w.includes_self) {
    throw ValidationError("Moran's I requires weights without self loops");
  }
  if (x.size() != w.n) {
    throw ValidationError("Moran's I: value/weights length mismatch");
  }
  if (w.n < 4) {
    throw NumericalError(
        "Moran's I randomization variance requires at least 4 tracts");
  }
  if (w.islands.size() == w.n) {
    throw NumericalError("Moran's I: all tracts are islands");
  }
  double m = 0.0;
  for (double v : x) m += v;
  m /= double(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  if (ss == 0.0) throw NumericalError("Moran's I: input has zero variance");
}

}  // namespace

MoranResult morans_i(std::span<const double> x, const WeightsMatrix& w) {
  check_moran_inputs(x, w);
  const std::size_t n = x.size();
  const double nd = double(n);

  // Weight sums. S1 needs w_ji lookups; neighbor lists are sorted by index so
  // a binary search per edge suffices.
  auto weight_at = [&](std::size_t i, std::size_t j) -> double {
    const auto& row = w.neighbors[i];
    auto it = std::lower_bound(
        row.begin(), row.end(), j,
        [](const Neighbor& nb, std::size_t v) { return nb.index < v; });
    return (it != row.end() && it->index == j) ? it->weight : 0.0;
  };

  double s0 = 0.0, s1 = 0.0;
  std::vector<double> row_sums(n, 0.0), col_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : w.neighbors[i]) {
      s0 += nb.weight;
      row_sums[i] += nb.weight;
      col_sums[nb.index] += nb.weight;
      const double sym = nb.weight + weight_at(nb.index, i);
      s1 += 0.5 * sym * sym;
    }
  }
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = row_sums[i] + col_sums[i];
    s2 += t * t;
  }

  double m = 0.0;
  for (double v : x) m += v;
  m /= nd;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double b2 = nd * m4 / (m2 * m2);

  MoranResult res;
  res.i = moran_statistic(x, w, s0);
  res.expected = -1.0 / (nd - 1.0);

  const double e_i2 =
      (nd * ((nd * nd - 3.0 * nd + 3.0) * s1 - nd * s2 + 3.0 * s0 * s0) -
       b2 * ((nd * nd - nd) * s1 - 2.0 * nd * s2 + 6.0 * s0 * s0)) /
      ((nd - 1.0) * (nd - 2.0) * (nd - 3.0) * s0 * s0);
  res.variance = e_i2 - res.expected * res.expected;
  if (res.variance <= 0.0) {
    throw NumericalError("Moran's I: nonpositive randomization variance");
  }
  res.z = (res.i - res.expected) / std::sqrt(res.variance);
  res.p_analytic = normal_two_sided_p(res.z);
  return res;
}

MoranResult morans_i_permutation(std::span<const double> x,
                                 const WeightsMatrix& w, int n_perm,
                                 std::uint64_t seed, int threads) {
  if (n_perm < 99) {
    throw ValidationError("permutation test requires n_perm >= 99");
  }
  MoranResult res = morans_i(x, w);
  const double observed_dev = std::abs(res.i - res.expected);
  const double w_sum = w.w_sum;

  // One RNG stream per replicate: replicate r shuffles a fresh copy of x
  // with Rng(seed, r + 1). Extremeness flags land in per-replicate slots, so
  // any scheduling of the replicates yields the same count.
  std::vector<char> extreme(std::size_t(n_perm), 0);
  const std::vector<double> base(x.begin(), x.end());
  parallel_for(std::size_t(n_perm), threads, [&](std::size_t r) {
    std::vector<double> shuffled = base;
    Rng rng(seed, std::uint64_t(r) + 1);
    rng.shuffle(shuffled);
    const double i_star = moran_statistic(shuffled, w, w_sum);
    extreme[r] = std::abs(i_star - res.expected) >= observed_dev ? 1 : 0;
  });
  std::size_t count = 0;
  for (char c : extreme) count += std::size_t(c);

  res.p_permutation = double(1 + count) / double(n_perm + 1);
  res.n_perm = n_perm;
  res.seed = seed;
  return res;
}

HotSpotResult getis_ord_gi_star(std::span<const double> x,
                                const WeightsMatrix& w, int threads) {
  if (!w.includes_self) {
    throw ValidationError("Gi* requires weights that include self");
  }
  if (x.size() != w.n) {
    throw ValidationError("Gi*: value/weights length mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) throw NumericalError("Gi* requires at least 2 tracts");
  const double nd = double(n);

  double m = 0.0;
  for (double v : x) m += v;
  m /= nd;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  if (ss == 0.0) throw NumericalError("Gi*: input has zero variance");
  const double s_pop = std::sqrt(ss / nd);  // population sd, includes i

  HotSpotResult res;
  res.gi_z.resize(n);
  res.p.resize(n);
  std::vector<char> degenerate(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    double sw = 0.0, sw2 = 0.0, lag = 0.0;
    for (const Neighbor& nb : w.neighbors[i]) {
      sw += nb.weight;
      sw2 += nb.weight * nb.weight;
      lag += nb.weight * x[nb.index];
    }
    const double inner = (nd * sw2 - sw * sw) / (nd - 1.0);
    // Exact zero marks a neighborhood spanning the whole region (binary
    // weights); tolerate FP residue relative to the terms that cancelled.
    if (inner <= 1e-12 * (nd * sw2)) {
      res.gi_z[i] = 0.0;
      res.p[i] = 1.0;
      degenerate[i] = 1;
      return;
    }
    const double z = (lag - m * sw) / (s_pop * std::sqrt(inner));
    res.gi_z[i] = z;
    res.p[i] = normal_two_sided_p(z);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (degenerate[i]) {
      res.warnings.push_back(
          "tract index " + std::to_string(i) +
          ": neighborhood spans the entire region; Gi* undefined, z set to 0");
    }
  }
  return res;
}

const char* to_string(HotspotCategory c) {
  switch (c) {
    case HotspotCategory::hot99: return "hot99";
    case HotspotCategory::hot95: return "hot95";
    case HotspotCategory::hot90: return "hot90";
    case HotspotCategory::notsig: return "notsig";
    case HotspotCategory::cold90: return "cold90";
    case HotspotCategory::cold95: return "cold95";
    case HotspotCategory::cold99: return "cold99";
  }
  return "notsig";
}

std::vector<bool> bh_reject(std::span<const double> p, double alpha) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  // Largest k with p_(k) <= k * alpha / m (1-based k).
  double threshold = -1.0;
  for (std::size_t k = m; k >= 1; --k) {
    if (p[order[k - 1]] <= double(k) * alpha / double(m)) {
      threshold = p[order[k - 1]];
      break;
    }
  }
  std::vector<bool> reject(m, false);
  if (threshold < 0.0) return reject;
  for (std::size_t i = 0; i < m; ++i) reject[i] = p[i] <= threshold;
  return reject;
}

namespace {

std::vector<HotspotCategory> classify(
    std::span<const double> z, const std::array<double, 3>& alphas,
    const std::vector<std::vector<bool>>& significant) {
  // alphas descending: [0] most lenient (90), [2] strictest (99).
  std::vector<HotspotCategory> cats(z.size(), HotspotCategory::notsig);
  for (std::size_t i = 0; i < z.size(); ++i) {
    int level = -1;  // 0 => alphas[0] (90), 1 => 95, 2 => 99
    for (int a = 2; a >= 0; --a) {
      if (significant[std::size_t(a)][i]) {
        level = a;
        break;
      }
    }
    if (level < 0) continue;
    const bool hot = z[i] > 0.0;
    switch (level) {
      case 2: cats[i] = hot ? HotspotCategory::hot99 : HotspotCategory::cold99; break;
      case 1: cats[i] = hot ? HotspotCategory::hot95 : HotspotCategory::cold95; break;
      default: cats[i] = hot ? HotspotCategory::hot90 : HotspotCategory::cold90; break;
    }
  }
  return cats;
}

void check_alphas(const std::array<double, 3>& alphas) {
  if (!(alphas[0] > alphas[1] && alphas[1] > alphas[2])) {
    throw ValidationError("alpha levels must be strictly descending");
  }
  for (double a : alphas) {
    if (a <= 0.0 || a >= 1.0) {
      throw ValidationError("alpha levels must lie in (0, 1)");
    }
  }
}

}  // namespace

std::vector<HotspotCategory> fdr_classify(std::span<const double> z,
                                          std::array<double, 3> alphas) {
  check_alphas(alphas);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = normal_two_sided_p(z[i]);
  std::vector<std::vector<bool>> significant;
  for (double a : alphas) significant.push_back(bh_reject(p, a));
  return classify(z, alphas, significant);
}

std::vector<HotspotCategory> raw_classify(std::span<const double> z,
                                          std::array<double, 3> alphas) {
  check_alphas(alphas);
  std::vector<std::vector<bool>> significant;
  for (double a : alphas) {
    std::vector<bool> sig(z.size(), false);
    for (std::size_t i = 0; i < z.size(); ++i) {
      sig[i] = normal_two_sided_p(z[i]) <= a;
    }
    significant.push_back(std::move(sig));
  }
  return classify(z, alphas, significant);
}

}  // namespace geoaff
