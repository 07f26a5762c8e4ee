#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snictorus/equilibria.hpp"

namespace snic {

struct LegendEntry {
    int code = 0;
    std::string label;
    std::string color;  ///< CSS color; "hatch" selects the unresolved pattern
};

/// Cell codes on a parameter grid, row-major with mu2 outer.
struct RasterLayer {
    ParameterGrid grid;
    std::vector<int> codes;
    std::vector<LegendEntry> legend;  ///< colors by code; unknown codes are drawn grey
};

struct CurveLayer {
    std::string name;
    std::vector<std::vector<Vec2>> polylines;  ///< points in (mu1, mu2)
    std::string color = "#000000";
    bool dashed = false;
    double width = 1.5;
};

struct SvgStyle {
    int width = 640;
    int height = 640;
    std::string title;
    /// Plot window in (mu1, mu2); taken from the raster grid (or the curves) when absent.
    std::optional<Vec2> lo;
    std::optional<Vec2> hi;
};

/// Layered SVG: raster cells, curves, optional cusp marker, axes frame and legend.
/// Without raster and curves the document holds only the legend.
std::string render_svg(const std::optional<RasterLayer>& raster, const std::vector<CurveLayer>& curves,
                       const std::optional<Vec2>& cusp_marker, const SvgStyle& style = {});

/// Legends for the three classifiers.
std::vector<LegendEntry> count_legend();
std::vector<LegendEntry> regime_legend();
std::vector<LegendEntry> attractor_legend();

/// Outer and cusped saddle-node curves and the neutral-saddle parabola of the reduced box,
/// clipped to the window.
std::vector<CurveLayer> analytic_curve_layers(double delta1, double delta2, Vec2 lo, Vec2 hi, int samples = 800);

}  // namespace snic
