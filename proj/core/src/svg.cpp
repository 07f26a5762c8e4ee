#include "snictorus/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "snictorus/curves.hpp"

namespace snic {

namespace {

constexpr int margin_left = 70;
constexpr int margin_right = 190;
constexpr int margin_top = 40;
constexpr int margin_bottom = 60;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

struct Frame {
    Vec2 lo, hi;
    double x0, y0, w, h;

    double px(double mu1) const { return x0 + (mu1 - lo.x1) / (hi.x1 - lo.x1) * w; }
    double py(double mu2) const { return y0 + h - (mu2 - lo.x2) / (hi.x2 - lo.x2) * h; }
    bool inside(Vec2 p) const { return p.x1 >= lo.x1 && p.x1 <= hi.x1 && p.x2 >= lo.x2 && p.x2 <= hi.x2; }
};

}  // namespace

std::vector<LegendEntry> count_legend() {
    return {{-1, "failed", "hatch"}, {0, "0 equilibria", "#f7f7f7"}, {2, "2 equilibria", "#9ecae1"},
            {4, "4 equilibria", "#3182bd"}};
}

std::vector<LegendEntry> regime_legend() {
    return {{0, "unresolved", "hatch"},
            {1, "fully mode-locked", "#bdbdbd"},
            {2, "Cherry", "#fdae6b"},
            {3, "Poincare (p,q)", "#74c476"},
            {4, "Poincare irrational", "#c7e9c0"}};
}

std::vector<LegendEntry> attractor_legend() {
    return {{0, "unresolved", "hatch"},
            {1, "equilibrium", "#bdbdbd"},
            {2, "periodic orbit", "#74c476"},
            {3, "quasiperiodic", "#c7e9c0"},
            {4, "coexistence", "#de2d26"}};
}

std::vector<CurveLayer> analytic_curve_layers(double delta1, double delta2, Vec2 lo, Vec2 hi, int samples) {
    std::vector<CurveLayer> layers;
    if (!(delta1 > 0.0) || !(delta2 > 0.0) || samples < 2) return layers;
    const Frame fr{lo, hi, 0, 0, 1, 1};
    const double tc = cusp(delta1, delta2).theta_c;

    auto clipped = [&](const std::vector<Vec2>& pts) {
        std::vector<std::vector<Vec2>> out;
        std::vector<Vec2> cur;
        for (const Vec2& p : pts) {
            if (fr.inside(p)) {
                cur.push_back(p);
            } else if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (cur.size() >= 2) out.push_back(std::move(cur));
        return out;
    };

    for (int sigma : {-1, 1}) {
        std::vector<Vec2> pts;
        for (const auto& s : sample_sne(delta1, delta2, sigma, tc - 10.0, tc + 10.0, 20 * samples)) pts.push_back(s.mu);
        CurveLayer c;
        c.name = sigma < 0 ? "outer sne" : "cusped sne";
        c.color = sigma < 0 ? "#08306b" : "#a50f15";
        c.polylines = clipped(pts);
        layers.push_back(std::move(c));
    }

    std::vector<Vec2> lower, upper;
    for (int i = 0; i < samples; ++i) {
        const double mu1 = lo.x1 + (hi.x1 - lo.x1) * i / (samples - 1);
        const auto r = neutral_saddle_curve(delta1, delta2, mu1);
        if (r.empty()) continue;
        lower.push_back({mu1, r.front()});
        upper.push_back({mu1, r.back()});
    }
    std::reverse(upper.begin(), upper.end());
    lower.insert(lower.end(), upper.begin(), upper.end());
    CurveLayer ns;
    ns.name = "neutral saddle";
    ns.color = "#54278f";
    ns.dashed = true;
    ns.polylines = clipped(lower);
    layers.push_back(std::move(ns));
    return layers;
}

std::string render_svg(const std::optional<RasterLayer>& raster, const std::vector<CurveLayer>& curves,
                       const std::optional<Vec2>& cusp_marker, const SvgStyle& style) {
    Vec2 lo{-1.0, -1.0};
    Vec2 hi{1.0, 1.0};
    bool have_window = false;
    if (raster && !raster->codes.empty() && raster->grid.nx >= 1 && raster->grid.ny >= 1) {
        const ParameterGrid& g = raster->grid;
        const double hx = g.nx > 1 ? 0.5 * (g.mu1_hi - g.mu1_lo) / (g.nx - 1) : 0.5;
        const double hy = g.ny > 1 ? 0.5 * (g.mu2_hi - g.mu2_lo) / (g.ny - 1) : 0.5;
        lo = {g.mu1_lo - hx, g.mu2_lo - hy};
        hi = {g.mu1_hi + hx, g.mu2_hi + hy};
        have_window = true;
    } else {
        Vec2 a{INFINITY, INFINITY}, b{-INFINITY, -INFINITY};
        for (const auto& c : curves)
            for (const auto& pl : c.polylines)
                for (const Vec2& p : pl) {
                    a = {std::min(a.x1, p.x1), std::min(a.x2, p.x2)};
                    b = {std::max(b.x1, p.x1), std::max(b.x2, p.x2)};
                }
        if (a.x1 < b.x1 && a.x2 < b.x2) {
            lo = a;
            hi = b;
            have_window = true;
        }
    }
    if (style.lo) lo = *style.lo;
    if (style.hi) hi = *style.hi;

    const int W = std::max(style.width, margin_left + margin_right + 50);
    const int H = std::max(style.height, margin_top + margin_bottom + 50);
    const Frame fr{lo, hi, static_cast<double>(margin_left), static_cast<double>(margin_top),
                   static_cast<double>(W - margin_left - margin_right),
                   static_cast<double>(H - margin_top - margin_bottom)};

    std::vector<LegendEntry> legend = raster ? raster->legend : std::vector<LegendEntry>{};
    std::map<int, std::string> colors;
    for (const auto& e : legend) colors[e.code] = e.color;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
    s << "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" "
         "patternTransform=\"rotate(45)\"><rect width=\"6\" height=\"6\" fill=\"#ffffff\"/>"
         "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#636363\" stroke-width=\"2\"/></pattern></defs>\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!style.title.empty())
        s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
          << escape(style.title) << "</text>\n";

    if (raster && raster->codes.size() == raster->grid.cells()) {
        const ParameterGrid& g = raster->grid;
        const double dx = g.nx > 1 ? (g.mu1_hi - g.mu1_lo) / (g.nx - 1) : 1.0;
        const double dy = g.ny > 1 ? (g.mu2_hi - g.mu2_lo) / (g.ny - 1) : 1.0;
        s << "<g id=\"raster\" shape-rendering=\"crispEdges\">\n";
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const int code = raster->codes[static_cast<std::size_t>(j) * g.nx + i];
                const auto it = colors.find(code);
                const std::string color = it == colors.end() ? "#969696" : it->second;
                const double x0 = fr.px(g.mu1(i) - 0.5 * dx);
                const double x1 = fr.px(g.mu1(i) + 0.5 * dx);
                const double y0 = fr.py(g.mu2(j) + 0.5 * dy);
                const double y1 = fr.py(g.mu2(j) - 0.5 * dy);
                s << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0 + 0.05)
                  << "\" height=\"" << num(y1 - y0 + 0.05) << "\" fill=\""
                  << (color == "hatch" ? "url(#hatch)" : color) << "\"/>\n";
            }
        }
        s << "</g>\n";
    }

    s << "<g id=\"curves\" fill=\"none\">\n";
    for (const auto& c : curves) {
        for (const auto& pl : c.polylines) {
            if (pl.size() < 2) continue;
            s << "<polyline stroke=\"" << c.color << "\" stroke-width=\"" << num(c.width) << '"';
            if (c.dashed) s << " stroke-dasharray=\"6,4\"";
            s << " points=\"";
            for (const Vec2& p : pl) s << num(fr.px(p.x1)) << ',' << num(fr.py(p.x2)) << ' ';
            s << "\"><title>" << escape(c.name) << "</title></polyline>\n";
        }
    }
    s << "</g>\n";

    if (cusp_marker && fr.inside(*cusp_marker)) {
        s << "<g id=\"cusp\"><circle cx=\"" << num(fr.px(cusp_marker->x1)) << "\" cy=\"" << num(fr.py(cusp_marker->x2))
          << "\" r=\"4\" fill=\"#000000\"/><text x=\"" << num(fr.px(cusp_marker->x1) + 6) << "\" y=\""
          << num(fr.py(cusp_marker->x2) - 6) << "\" font-family=\"sans-serif\" font-size=\"12\">cusp</text></g>\n";
    }

    if (have_window) {
        s << "<g id=\"axes\" font-family=\"sans-serif\" font-size=\"12\">\n";
        s << "<rect x=\"" << fr.x0 << "\" y=\"" << fr.y0 << "\" width=\"" << fr.w << "\" height=\"" << fr.h
          << "\" fill=\"none\" stroke=\"#000000\"/>\n";
        if (lo.x1 < 0.0 && hi.x1 > 0.0)
            s << "<line x1=\"" << num(fr.px(0)) << "\" y1=\"" << fr.y0 << "\" x2=\"" << num(fr.px(0)) << "\" y2=\""
              << fr.y0 + fr.h << "\" stroke=\"#737373\" stroke-width=\"0.5\"/>\n";
        if (lo.x2 < 0.0 && hi.x2 > 0.0)
            s << "<line x1=\"" << fr.x0 << "\" y1=\"" << num(fr.py(0)) << "\" x2=\"" << fr.x0 + fr.w << "\" y2=\""
              << num(fr.py(0)) << "\" stroke=\"#737373\" stroke-width=\"0.5\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double a = lo.x1 + (hi.x1 - lo.x1) * k / 4.0;
            const double b = lo.x2 + (hi.x2 - lo.x2) * k / 4.0;
            s << "<text x=\"" << num(fr.px(a)) << "\" y=\"" << fr.y0 + fr.h + 18 << "\" text-anchor=\"middle\">"
              << num(a) << "</text>\n";
            s << "<text x=\"" << fr.x0 - 6 << "\" y=\"" << num(fr.py(b) + 4) << "\" text-anchor=\"end\">" << num(b)
              << "</text>\n";
        }
        s << "<text x=\"" << fr.x0 + fr.w / 2 << "\" y=\"" << fr.y0 + fr.h + 40
          << "\" text-anchor=\"middle\">mu1</text>\n";
        s << "<text x=\"" << fr.x0 - 50 << "\" y=\"" << fr.y0 + fr.h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
          << fr.x0 - 50 << ' ' << fr.y0 + fr.h / 2 << ")\">mu2</text>\n";
        s << "</g>\n";
    }

    s << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = margin_top;
    const double lx = W - margin_right + 15;
    for (const auto& e : legend) {
        s << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" stroke=\"#000000\" fill=\""
          << (e.color == "hatch" ? "url(#hatch)" : e.color) << "\"/><text x=\"" << lx + 20 << "\" y=\"" << ly + 11
          << "\">" << escape(e.label) << "</text>\n";
        ly += 20;
    }
    for (const auto& c : curves) {
        s << "<line x1=\"" << lx << "\" y1=\"" << ly + 7 << "\" x2=\"" << lx + 14 << "\" y2=\"" << ly + 7
          << "\" stroke=\"" << c.color << "\" stroke-width=\"2\"" << (c.dashed ? " stroke-dasharray=\"4,2\"" : "")
          << "/><text x=\"" << lx + 20 << "\" y=\"" << ly + 11 << "\">" << escape(c.name) << "</text>\n";
        ly += 20;
    }
    if (cusp_marker) {
        s << "<circle cx=\"" << lx + 7 << "\" cy=\"" << ly + 7 << "\" r=\"4\" fill=\"#000000\"/><text x=\"" << lx + 20
          << "\" y=\"" << ly + 11 << "\">cusp</text>\n";
    }
    s << "</g>\n</svg>\n";
    return s.str();
}

}  // namespace snic
