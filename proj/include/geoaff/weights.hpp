#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "geoaff/geometry.hpp"
#include "geoaff/tract.hpp"

namespace geoaff {

enum class Standardization { binary, row_standardized };

struct Neighbor {
  std::size_t index = 0;
  double weight = 0.0;
};

// Sparse spatial weights over the canonical (sorted TractId) index order.
// Neighbor lists are sorted by index, so identical inputs always produce an
// identical in-memory representation regardless of construction order.
struct WeightsMatrix {
  std::size_t n = 0;
  std::vector<std::vector<Neighbor>> neighbors;
  Standardization standardization = Standardization::binary;
  bool includes_self = false;
  std::vector<std::size_t> islands;  // indices with no neighbor j != i
  double w_sum = 0.0;                // sum of all weights incl. self loops

  double row_sum(std::size_t i) const;
  // Recomputes islands and w_sum from the adjacency lists.
  void refresh_derived();
};

// Queen contiguity: two tracts are neighbors iff they share at least one
// snapped boundary vertex. snap_tol <= 0 selects the default tolerance,
// 1e-9 x the combined bounding-box diagonal. Binary weights.
WeightsMatrix queen_contiguity(const GeometrySet& g, double snap_tol = 0.0);

// Rook contiguity: neighbors iff a snapped boundary edge (consecutive vertex
// pair) occurs in both tracts' rings, i.e. a shared border of positive
// length. A border that one polygon subdivides with extra vertices the other
// lacks is not detected (such pairs still count as queen neighbors).
WeightsMatrix rook_contiguity(const GeometrySet& g, double snap_tol = 0.0);

// Directed k-nearest-neighbor weights over centroids. Ties broken by
// (distance, TractId) lexicographic order. Throws ValidationError if
// k >= number of points. Binary weights; symmetry is NOT enforced.
WeightsMatrix knn_weights(const std::vector<Point>& centroids,
                          const std::vector<TractId>& ids, std::size_t k);

// Binary distance-band weights: j is a neighbor of i iff 0 < dist(i,j) <= d;
// include_self additionally puts weight 1 on the diagonal (required for Gi*).
WeightsMatrix distance_band_weights(const std::vector<Point>& centroids,
                                    double d, bool include_self);

// Returns a copy with every non-island row rescaled to sum 1. Islands are
// left untouched. Idempotent.
WeightsMatrix row_standardize(const WeightsMatrix& w);

// Adds unit self loops to a contiguity matrix (Gi* variants of queen/rook).
WeightsMatrix add_self_loops(const WeightsMatrix& w);

// Centroids in canonical order, paired with the ids.
std::vector<Point> centroids_of(const GeometrySet& g);

// Largest 1-nearest-neighbor distance: the smallest distance band that
// leaves no islands. Throws ValidationError for fewer than 2 points.
double max_nearest_neighbor_distance(const std::vector<Point>& centroids);

// JSON adjacency-list export/import:
// {"standardization": ..., "includes_self": ..., "rows":
//   [{"id": ..., "neighbors": [{"id": ..., "weight": ...}]}]}
std::string weights_to_json(const WeightsMatrix& w,
                            const std::vector<TractId>& ids);
WeightsMatrix weights_from_json(std::istream& in,
                                const std::vector<TractId>& ids);

}  // namespace geoaff
