#include "geoaff/weights.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "geoaff/errors.hpp"
#include "geoaff/jsonio.hpp"

namespace geoaff {

double WeightsMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (const Neighbor& nb : neighbors[i]) s += nb.weight;
  return s;
}

void WeightsMatrix::refresh_derived() {
  islands.clear();
  w_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    bool has_other = false;
    for (const Neighbor& nb : neighbors[i]) {
      w_sum += nb.weight;
      if (nb.index != i) has_other = true;
    }
    if (!has_other) islands.push_back(i);
  }
}

namespace {

using SnapKey = std::pair<long long, long long>;

struct SnapKeyHash {
  std::size_t operator()(const SnapKey& k) const noexcept {
    std::size_t h = std::hash<long long>{}(k.first);
    h ^= std::hash<long long>{}(k.second) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
    return h;
  }
};

struct EdgeKeyHash {
  std::size_t operator()(const std::pair<SnapKey, SnapKey>& e) const noexcept {
    SnapKeyHash h;
    return h(e.first) * 1315423911u ^ h(e.second);
  }
};

double default_snap_tol(const GeometrySet& g) {
  std::vector<MultiPolygon> all;
  all.reserve(g.rows.size());
  for (const auto& [id, geom] : g.rows) all.push_back(geom);
  const double diag = combined_bounds(all).diagonal();
  return diag > 0.0 ? 1e-9 * diag : 1e-12;
}

SnapKey snap(const Point& p, double tol) {
  return SnapKey{llround(p.x / tol), llround(p.y / tol)};
}

// Every ring vertex of every part, closing duplicates skipped.
template <class Fn>
void for_each_vertex(const MultiPolygon& g, const Fn& fn) {
  for (const Polygon& poly : g.parts) {
    for (std::size_t i = 0; i + 1 < poly.exterior.size(); ++i) {
      fn(poly.exterior[i]);
    }
    for (const Ring& hole : poly.holes) {
      for (std::size_t i = 0; i + 1 < hole.size(); ++i) fn(hole[i]);
    }
  }
}

// Every boundary edge as an ordered pair of snapped keys.
template <class Fn>
void for_each_edge(const MultiPolygon& g, double tol, const Fn& fn) {
  auto walk = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      SnapKey a = snap(ring[i], tol);
      SnapKey b = snap(ring[i + 1], tol);
      if (a == b) continue;  // degenerate (snapped-away) edge
      if (b < a) std::swap(a, b);
      fn(std::make_pair(a, b));
    }
  };
  for (const Polygon& poly : g.parts) {
    walk(poly.exterior);
    for (const Ring& hole : poly.holes) walk(hole);
  }
}

WeightsMatrix from_pair_sets(std::size_t n,
                             const std::vector<std::set<std::size_t>>& adj) {
  WeightsMatrix w;
  w.n = n;
  w.neighbors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.neighbors[i].reserve(adj[i].size());
    for (std::size_t j : adj[i]) w.neighbors[i].push_back(Neighbor{j, 1.0});
  }
  w.standardization = Standardization::binary;
  w.includes_self = false;
  w.refresh_derived();
  return w;
}

}  // namespace

WeightsMatrix queen_contiguity(const GeometrySet& g, double snap_tol) {
  const double tol = snap_tol > 0.0 ? snap_tol : default_snap_tol(g);
  const std::size_t n = g.rows.size();

  std::unordered_map<SnapKey, std::vector<std::uint32_t>, SnapKeyHash> buckets;
  std::size_t idx = 0;
  for (const auto& [id, geom] : g.rows) {
    for_each_vertex(geom, [&](const Point& p) {
      auto& bucket = buckets[snap(p, tol)];
      if (bucket.empty() || bucket.back() != idx) bucket.push_back(idx);
    });
    ++idx;
  }

  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& [key, tracts] : buckets) {
    for (std::size_t a = 0; a < tracts.size(); ++a) {
      for (std::size_t b = a + 1; b < tracts.size(); ++b) {
        adj[tracts[a]].insert(tracts[b]);
        adj[tracts[b]].insert(tracts[a]);
      }
    }
  }
  return from_pair_sets(n, adj);
}

WeightsMatrix rook_contiguity(const GeometrySet& g, double snap_tol) {
  const double tol = snap_tol > 0.0 ? snap_tol : default_snap_tol(g);
  const std::size_t n = g.rows.size();

  std::unordered_map<std::pair<SnapKey, SnapKey>, std::vector<std::uint32_t>,
                     EdgeKeyHash>
      buckets;
  std::size_t idx = 0;
  for (const auto& [id, geom] : g.rows) {
    for_each_edge(geom, tol, [&](const std::pair<SnapKey, SnapKey>& e) {
      auto& bucket = buckets[e];
      if (bucket.empty() || bucket.back() != idx) bucket.push_back(idx);
    });
    ++idx;
  }

  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& [key, tracts] : buckets) {
    for (std::size_t a = 0; a < tracts.size(); ++a) {
      for (std::size_t b = a + 1; b < tracts.size(); ++b) {
        adj[tracts[a]].insert(tracts[b]);
        adj[tracts[b]].insert(tracts[a]);
      }
    }
  }
  return from_pair_sets(n, adj);
}

WeightsMatrix knn_weights(const std::vector<Point>& centroids,
                          const std::vector<TractId>& ids, std::size_t k) {
  const std::size_t n = centroids.size();
  if (ids.size() != n) throw ValidationError("knn: ids/centroids length mismatch");
  if (k == 0) throw ValidationError("knn: k must be positive");
  if (k >= n) {
    throw ValidationError("knn: k=" + std::to_string(k) +
                          " must be smaller than the number of tracts (" +
                          std::to_string(n) + ")");
  }
  WeightsMatrix w;
  w.n = n;
  w.neighbors.resize(n);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = centroids[i].x - centroids[j].x;
      const double dy = centroids[i].y - centroids[j].y;
      cand.emplace_back(std::sqrt(dx * dx + dy * dy), j);
    }
    // Ties broken by (distance, TractId); ids are sorted so comparing the
    // canonical index is the same as comparing the id string.
    std::sort(cand.begin(), cand.end(),
              [&](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return ids[a.second] < ids[b.second];
              });
    std::vector<std::size_t> chosen;
    for (std::size_t c = 0; c < k; ++c) chosen.push_back(cand[c].second);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t j : chosen) w.neighbors[i].push_back(Neighbor{j, 1.0});
  }
  w.standardization = Standardization::binary;
  w.includes_self = false;
  w.refresh_derived();
  return w;
}

WeightsMatrix distance_band_weights(const std::vector<Point>& centroids,
                                    double d, bool include_self) {
  if (d <= 0.0) throw ValidationError("distance band must be positive");
  const std::size_t n = centroids.size();
  WeightsMatrix w;
  w.n = n;
  w.neighbors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        if (include_self) w.neighbors[i].push_back(Neighbor{j, 1.0});
        continue;
      }
      const double dx = centroids[i].x - centroids[j].x;
      const double dy = centroids[i].y - centroids[j].y;
      if (std::sqrt(dx * dx + dy * dy) <= d) {
        w.neighbors[i].push_back(Neighbor{j, 1.0});
      }
    }
  }
  w.standardization = Standardization::binary;
  w.includes_self = include_self;
  w.refresh_derived();
  return w;
}

WeightsMatrix row_standardize(const WeightsMatrix& w) {
  WeightsMatrix out = w;
  for (std::size_t i = 0; i < out.n; ++i) {
    bool has_other = false;
    for (const Neighbor& nb : out.neighbors[i]) {
      if (nb.index != i) has_other = true;
    }
    if (!has_other) continue;  // islands untouched
    const double s = out.row_sum(i);
    if (s == 0.0) continue;
    for (Neighbor& nb : out.neighbors[i]) nb.weight /= s;
  }
  out.standardization = Standardization::row_standardized;
  out.refresh_derived();
  return out;
}

WeightsMatrix add_self_loops(const WeightsMatrix& w) {
  WeightsMatrix out = w;
  for (std::size_t i = 0; i < out.n; ++i) {
    auto& row = out.neighbors[i];
    const bool has_self =
        std::any_of(row.begin(), row.end(),
                    [i](const Neighbor& nb) { return nb.index == i; });
    if (!has_self) {
      row.push_back(Neighbor{i, 1.0});
      std::sort(row.begin(), row.end(),
                [](const Neighbor& a, const Neighbor& b) {
                  return a.index < b.index;
                });
    }
  }
  out.includes_self = true;
  out.refresh_derived();
  return out;
}

std::vector<Point> centroids_of(const GeometrySet& g) {
  std::vector<Point> pts;
  pts.reserve(g.rows.size());
  for (const auto& [id, geom] : g.rows) {
    pts.push_back(multipolygon_centroid(geom));
  }
  return pts;
}

double max_nearest_neighbor_distance(const std::vector<Point>& centroids) {
  const std::size_t n = centroids.size();
  if (n < 2) throw ValidationError("need at least 2 points for a distance band");
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = centroids[i].x - centroids[j].x;
      const double dy = centroids[i].y - centroids[j].y;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

std::string weights_to_json(const WeightsMatrix& w,
                            const std::vector<TractId>& ids) {
  if (ids.size() != w.n) throw ValidationError("weights_to_json: id count mismatch");
  nlohmann::ordered_json doc;
  doc["standardization"] =
      w.standardization == Standardization::binary ? "binary" : "row_standardized";
  doc["includes_self"] = w.includes_self;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < w.n; ++i) {
    nlohmann::ordered_json row;
    row["id"] = ids[i].value;
    auto nbs = nlohmann::ordered_json::array();
    for (const Neighbor& nb : w.neighbors[i]) {
      nlohmann::ordered_json entry;
      entry["id"] = ids[nb.index].value;
      entry["weight"] = nb.weight;
      nbs.push_back(std::move(entry));
    }
    row["neighbors"] = std::move(nbs);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return dump_json(doc, 2);
}

WeightsMatrix weights_from_json(std::istream& in,
                                const std::vector<TractId>& ids) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid weights JSON: ") + e.what());
  }
  std::map<TractId, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

  WeightsMatrix w;
  w.n = ids.size();
  w.neighbors.resize(w.n);
  const std::string std_name = doc.value("standardization", "binary");
  w.standardization = std_name == "row_standardized"
                          ? Standardization::row_standardized
                          : Standardization::binary;
  w.includes_self = doc.value("includes_self", false);
  if (!doc.contains("rows") || !doc["rows"].is_array()) {
    throw ValidationError("weights JSON has no rows array");
  }
  std::vector<bool> seen(w.n, false);
  for (const auto& row : doc["rows"]) {
    const std::string id = row.value("id", "");
    const auto it = index.find(TractId{id});
    if (it == index.end()) {
      throw ValidationError("weights JSON names unknown tract '" + id + "'");
    }
    if (seen[it->second]) {
      throw ValidationError("weights JSON repeats tract '" + id + "'");
    }
    seen[it->second] = true;
    for (const auto& nb : row.value("neighbors", nlohmann::json::array())) {
      const std::string nid = nb.value("id", "");
      const auto nit = index.find(TractId{nid});
      if (nit == index.end()) {
        throw ValidationError("weights JSON names unknown neighbor '" + nid + "'");
      }
      w.neighbors[it->second].push_back(
          Neighbor{nit->second, nb.value("weight", 1.0)});
    }
    std::sort(w.neighbors[it->second].begin(), w.neighbors[it->second].end(),
              [](const Neighbor& a, const Neighbor& b) {
                return a.index < b.index;
              });
  }
  w.refresh_derived();
  return w;
}

}  // namespace geoaff
