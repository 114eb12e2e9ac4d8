#include "geoaff/choropleth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "geoaff/errors.hpp"
#include "geoaff/stats.hpp"

namespace geoaff {

namespace {

constexpr double kMapSide = 640.0;
constexpr double kMargin = 10.0;
constexpr double kLegendWidth = 190.0;
constexpr double kSwatch = 18.0;
constexpr double kLegendGap = 6.0;

// Sequential light-to-dark fills, 2..7 classes.
const std::vector<std::vector<const char*>> kSequentialPalettes{
    {"#ffeda0", "#f03b20"},
    {"#ffeda0", "#feb24c", "#f03b20"},
    {"#ffffb2", "#fecc5c", "#fd8d3c", "#e31a1c"},
    {"#ffffb2", "#fecc5c", "#fd8d3c", "#f03b20", "#bd0026"},
    {"#ffffb2", "#fed976", "#feb24c", "#fd8d3c", "#f03b20", "#bd0026"},
    {"#ffffb2", "#fed976", "#feb24c", "#fd8d3c", "#fc4e2a", "#e31a1c",
     "#b10026"},
};

const char* category_fill(HotspotCategory c) {
  switch (c) {
    case HotspotCategory::hot99: return "#b2182b";
    case HotspotCategory::hot95: return "#ef8a62";
    case HotspotCategory::hot90: return "#fddbc7";
    case HotspotCategory::notsig: return "#f7f7f7";
    case HotspotCategory::cold90: return "#d1e5f0";
    case HotspotCategory::cold95: return "#67a9cf";
    case HotspotCategory::cold99: return "#2166ac";
  }
  return "#f7f7f7";
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_edge(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Projection {
  double scale;
  double min_x, max_y;
  double map_w, map_h;

  double px(double x) const { return kMargin + (x - min_x) * scale; }
  double py(double y) const { return kMargin + (max_y - y) * scale; }
};

Projection make_projection(const std::vector<MultiPolygon>& shapes) {
  const Bbox b = combined_bounds(shapes);
  const double dx = std::max(b.max_x - b.min_x, 1e-12);
  const double dy = std::max(b.max_y - b.min_y, 1e-12);
  const double scale = std::min(kMapSide / dx, kMapSide / dy);
  return Projection{scale, b.min_x, b.max_y, dx * scale, dy * scale};
}

void append_path(std::ostringstream& svg, const Projection& proj,
                 const TractId& id, const MultiPolygon& mp,
                 const std::string& fill) {
  svg << "<path data-id=\"" << xml_escape(id.value) << "\" fill=\"" << fill
      << "\" fill-rule=\"evenodd\" d=\"";
  bool first_ring = true;
  const auto emit_ring = [&](const Ring& ring) {
    if (!first_ring) svg << " ";
    first_ring = false;
    for (std::size_t v = 0; v + 1 < ring.size(); ++v) {
      svg << (v == 0 ? "M" : "L") << fmt2(proj.px(ring[v].x)) << ","
          << fmt2(proj.py(ring[v].y));
    }
    svg << "Z";
  };
  for (const auto& part : mp.parts) {
    emit_ring(part.exterior);
    for (const auto& hole : part.holes) emit_ring(hole);
  }
  svg << "\"/>\n";
}

struct LegendEntry {
  std::string fill;
  std::string label;
};

std::string render_svg(const std::vector<TractId>& ids,
                       const std::vector<MultiPolygon>& shapes,
                       const std::vector<std::string>& fills,
                       const std::vector<LegendEntry>& legend,
                       const ChoroplethSpec& spec) {
  const Projection proj = make_projection(shapes);
  const double legend_h =
      double(legend.size()) * (kSwatch + kLegendGap) + 30.0;
  const double width = proj.map_w + 2 * kMargin + kLegendWidth;
  const double height = std::max(proj.map_h + 2 * kMargin, legend_h + 2 * kMargin);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width)
      << "\" height=\"" << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width)
      << " " << fmt2(height) << "\">\n";
  svg << "<metadata>config_hash=" << xml_escape(spec.config_hash)
      << "</metadata>\n";
  svg << "<title>" << xml_escape(spec.title) << "</title>\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt2(width) << "\" height=\""
      << fmt2(height) << "\" fill=\"#ffffff\"/>\n";
  svg << "<g stroke=\"#555555\" stroke-width=\"0.5\">\n";
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    append_path(svg, proj, ids[i], shapes[i], fills[i]);
  }
  svg << "</g>\n";

  const double lx = proj.map_w + 2 * kMargin;
  double ly = kMargin + 20.0;
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<text x=\"" << fmt2(lx) << "\" y=\"" << fmt2(ly - 6.0)
      << "\" font-weight=\"bold\">" << xml_escape(spec.title) << "</text>\n";
  for (const auto& entry : legend) {
    svg << "<rect x=\"" << fmt2(lx) << "\" y=\"" << fmt2(ly) << "\" width=\""
        << fmt2(kSwatch) << "\" height=\"" << fmt2(kSwatch) << "\" fill=\""
        << entry.fill << "\" stroke=\"#555555\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << fmt2(lx + kSwatch + 6.0) << "\" y=\""
        << fmt2(ly + kSwatch - 4.0) << "\">" << xml_escape(entry.label)
        << "</text>\n";
    ly += kSwatch + kLegendGap;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void check_shapes(const std::vector<TractId>& ids,
                  const std::vector<MultiPolygon>& shapes, std::size_t values) {
  if (shapes.empty()) throw ValidationError("choropleth: no polygons to draw");
  if (ids.size() != shapes.size() || values != shapes.size()) {
    throw ValidationError("choropleth: ids/shapes/values length mismatch");
  }
}

}  // namespace

std::string render_value_choropleth(const std::vector<TractId>& ids,
                                    const std::vector<MultiPolygon>& shapes,
                                    const std::vector<double>& values,
                                    const ChoroplethSpec& spec) {
  check_shapes(ids, shapes, values.size());
  if (spec.bins < 2 || spec.bins > 7) {
    throw ValidationError("choropleth: bins must be between 2 and 7");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ValidationError("choropleth: values must be finite");
    }
  }

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;  // upper bin edges, deduplicated
  for (int b = 1; b < spec.bins; ++b) {
    const double e = quantile_sorted(sorted, double(b) / double(spec.bins));
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  const std::size_t n_classes = edges.size() + 1;
  const auto& palette = kSequentialPalettes[n_classes - 2];

  const auto bin_of = [&](double v) {
    std::size_t b = 0;
    while (b < edges.size() && v > edges[b]) ++b;
    return b;
  };

  std::vector<std::string> fills;
  fills.reserve(values.size());
  for (double v : values) fills.push_back(palette[bin_of(v)]);

  std::vector<LegendEntry> legend;
  const double lo = sorted.front(), hi = sorted.back();
  for (std::size_t b = 0; b < n_classes; ++b) {
    const double from = b == 0 ? lo : edges[b - 1];
    const double to = b == n_classes - 1 ? hi : edges[b];
    legend.push_back(
        LegendEntry{palette[b], fmt_edge(from) + " \xe2\x80\x93 " + fmt_edge(to)});
  }
  return render_svg(ids, shapes, fills, legend, spec);
}

std::string render_category_choropleth(
    const std::vector<TractId>& ids, const std::vector<MultiPolygon>& shapes,
    const std::vector<HotspotCategory>& categories,
    const ChoroplethSpec& spec) {
  check_shapes(ids, shapes, categories.size());
  std::vector<std::string> fills;
  fills.reserve(categories.size());
  for (const auto c : categories) fills.push_back(category_fill(c));

  std::vector<LegendEntry> legend;
  for (const auto c :
       {HotspotCategory::hot99, HotspotCategory::hot95, HotspotCategory::hot90,
        HotspotCategory::notsig, HotspotCategory::cold90,
        HotspotCategory::cold95, HotspotCategory::cold99}) {
    legend.push_back(LegendEntry{category_fill(c), to_string(c)});
  }
  return render_svg(ids, shapes, fills, legend, spec);
}

}  // namespace geoaff
