#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoaff/tract.hpp"

namespace geoaff {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// A ring is stored closed: front() == back(). A valid ring has >= 4 vertices
// including the closing duplicate (i.e. at least a triangle).
using Ring = std::vector<Point>;

struct Polygon {
  Ring exterior;               // counter-clockwise after normalization
  std::vector<Ring> holes;     // clockwise after normalization
};

struct MultiPolygon {
  std::vector<Polygon> parts;  // a plain Polygon is a MultiPolygon with 1 part
};

struct Bbox {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  double diagonal() const;
};

// Shoelace signed area: positive for counter-clockwise rings (y-up convention).
double ring_signed_area(const Ring& ring);

bool ring_is_closed(const Ring& ring);

// True if two non-adjacent edges of the ring properly cross (interiors
// intersect). Touches at shared vertices are tolerated; only genuine
// crossings are flagged.
bool ring_self_intersects(const Ring& ring);

double multipolygon_area(const MultiPolygon& g);

// Area-weighted centroid over all parts (holes subtract via signed areas).
// Falls back to the vertex average for zero-area degenerate input.
Point multipolygon_centroid(const MultiPolygon& g);

Bbox multipolygon_bounds(const MultiPolygon& g);
Bbox combined_bounds(const std::vector<MultiPolygon>& gs);

// Tract geometries keyed by id. std::map iteration = lexicographic TractId
// order, which is the canonical index order shared with every aligned vector.
struct FeatureIssue {
  std::string id;       // tract id if known, else feature ordinal
  std::string message;
};

struct GeometrySet {
  std::map<TractId, MultiPolygon> rows;
  std::string crs_note;                     // free-form CRS hint from the source
  std::vector<std::string> warnings;        // e.g. auto-closed rings
  std::vector<FeatureIssue> feature_errors; // excluded features and why

  std::vector<TractId> sorted_ids() const;
};

}  // namespace geoaff
