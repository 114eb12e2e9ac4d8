#pragma once

#include <string>
#include <vector>

#include "geoaff/geometry.hpp"
#include "geoaff/spatial.hpp"
#include "geoaff/tract.hpp"

namespace geoaff {

struct ChoroplethSpec {
  int bins = 5;             // quantile classes for continuous maps, 2..7
  std::string title;        // rendered as the SVG title element
  std::string config_hash;  // stamped into the SVG metadata element
};

// Continuous values -> quantile-binned sequential fill (light to dark).
// Duplicate quantile edges collapse, so heavily tied data may use fewer
// classes than requested. Deterministic output: identical inputs give
// byte-identical SVG. Values must be finite; at least one polygon required.
std::string render_value_choropleth(const std::vector<TractId>& ids,
                                    const std::vector<MultiPolygon>& shapes,
                                    const std::vector<double>& values,
                                    const ChoroplethSpec& spec);

// Hot/cold category map with a fixed diverging palette (red hot, blue cold,
// neutral notsig); the legend always lists all seven categories.
std::string render_category_choropleth(
    const std::vector<TractId>& ids, const std::vector<MultiPolygon>& shapes,
    const std::vector<HotspotCategory>& categories, const ChoroplethSpec& spec);

}  // namespace geoaff
