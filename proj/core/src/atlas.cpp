#include "snictorus/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "snictorus/curves.hpp"
#include "snictorus/integrate.hpp"
#include "snictorus/io.hpp"
#include "snictorus/parallel.hpp"

namespace snic {

// ============================================================================
// Attractors
// ============================================================================

std::string_view to_string(AttractorKind k) {
    switch (k) {
        case AttractorKind::equilibrium: return "equilibrium";
        case AttractorKind::periodic_orbit: return "periodic_orbit";
        case AttractorKind::quasiperiodic: return "quasiperiodic";
    }
    return "?";
}

int AttractorLabel::count(AttractorKind k) const {
    return static_cast<int>(
        std::count_if(attractors.begin(), attractors.end(), [k](const Attractor& a) { return a.kind == k; }));
}

int AttractorLabel::color_code() const {
    if (unresolved || attractors.empty()) return 0;
    if (coexistence) return 4;
    switch (attractors.front().kind) {
        case AttractorKind::equilibrium: return 1;
        case AttractorKind::periodic_orbit: return 2;
        case AttractorKind::quasiperiodic: return 3;
    }
    return 0;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void add_periodic(AttractorLabel& out, const PeriodicOrbit& orb) {
    const Homotopy t = normalize_homotopy(orb.type.p, orb.type.q);
    for (const auto& a : out.attractors) {
        if (a.kind != AttractorKind::periodic_orbit || !(a.type == t)) continue;
        const bool same_period = std::abs(a.period - orb.period) <= 1e-5 * std::max(1.0, orb.period);
        const bool same_exponent = std::abs(a.exponent - orb.floquet_exponent) <= 1e-5 * std::max(1.0, std::abs(orb.floquet_exponent));
        if (same_period && same_exponent) return;
    }
    out.attractors.push_back({AttractorKind::periodic_orbit, orb.point, t, orb.floquet_exponent, orb.period});
}

void finalize(AttractorLabel& out) {
    std::set<AttractorKind> kinds;
    for (const auto& a : out.attractors) kinds.insert(a.kind);
    out.coexistence = kinds.size() >= 2;
}

void poincare_attractors(const Field& f, const AttractorOptions& opts, AttractorLabel& out) {
    auto section = find_global_cross_section(f);
    if (!section) section = find_transversal_circle(f);
    if (!section) {
        out.unresolved = true;
        out.note = "no certified cross-section";
        return;
    }
    const ReturnMap map(f, *section, std::min(1e-10, 0.1 * opts.regime.tol));
    const RotationEstimate est = rotation_number(map, 0.0, opts.regime.returns);
    const auto orbits = find_periodic_orbits(map, est, opts.regime.q_max, 48, std::max(opts.regime.tol, 1e-8));
    for (const auto& orb : orbits)
        if (orb.attracting()) add_periodic(out, orb);
    if (orbits.empty()) {
        Attractor q;
        q.kind = AttractorKind::quasiperiodic;
        q.point = map.point(0.0);
        out.attractors.push_back(q);
    } else if (out.count(AttractorKind::periodic_orbit) == 0) {
        out.unresolved = true;
        out.note = "periodic orbits found, none attracting";
    }
}

void winding_attractors(const Field& f, const AttractorOptions& opts, AttractorLabel& out) {
    const Region region = default_region(f);
    const int n = std::max(0, opts.orbit_samples);
    const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
    std::mt19937_64 rng(opts.regime.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec2> starts = opts.seeds;
    for (int k = 0; k < n; ++k) {
        const double a = (k % side + unit(rng)) / side;
        const double b = ((k / side) % side + unit(rng)) / side;
        starts.push_back({region.lo.x1 + a * (region.hi.x1 - region.lo.x1),
                          region.lo.x2 + b * (region.hi.x2 - region.lo.x2)});
    }
    bool quasi = false;
    Vec2 quasi_point;
    for (const Vec2& p : starts) {
        const HomologyDirection hd = homology_direction(f, p, opts.regime.T_max, opts.regime.tol);
        if (hd.zero) continue;
        const auto t = rational_direction(hd.revolutions, opts.regime.q_max, std::max(hd.confidence, 1e-6));
        if (!t || hd.confidence >= 0.5) {
            quasi = true;
            quasi_point = p;
            continue;
        }
        const Vec2 q = integrate(f, p, opts.settle_time, std::min(1e-10, opts.regime.tol)).end();
        const auto orb = converge_periodic_orbit(f, q, *t, opts.regime.tol);
        if (orb && orb->attracting()) add_periodic(out, *orb);
    }
    if (quasi && out.count(AttractorKind::periodic_orbit) == 0) {
        Attractor a;
        a.kind = AttractorKind::quasiperiodic;
        a.point = quasi_point;
        out.attractors.push_back(a);
    }
}

}  // namespace

AttractorLabel attractor_classify(const Field& f, const AttractorOptions& opts) {
    AttractorLabel out;
    try {
        const auto eqs = find_equilibria(f, opts.regime.search);
        out.equilibria = static_cast<int>(eqs.size());
        for (const auto& e : eqs) {
            if (e.kind != EquilibriumKind::sink) continue;
            Attractor a;
            a.kind = AttractorKind::equilibrium;
            a.point = e.p;
            a.exponent = e.eigenvalues[0].real();
            out.attractors.push_back(a);
        }
        if (f.geometry().periodic) {
            if (eqs.empty())
                poincare_attractors(f, opts, out);
            else
                winding_attractors(f, opts, out);
        }
    } catch (const NumericalError& e) {
        out.unresolved = true;
        out.note = e.what();
    }
    finalize(out);
    return out;
}

std::vector<AttractorLabel> attractor_continuation(const Family& family, Vec2 from, Vec2 to, int n,
                                                   const AttractorOptions& opts) {
    if (n < 1) throw PreconditionError("attractor_continuation: n must be positive");
    std::vector<AttractorLabel> out;
    std::vector<Vec2> carried;
    for (int k = 0; k < n; ++k) {
        const double s = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        const Vec2 mu = from + s * (to - from);
        AttractorOptions o = opts;
        o.seeds.insert(o.seeds.end(), carried.begin(), carried.end());
        out.push_back(attractor_classify(family.at(mu.x1, mu.x2), o));
        carried.clear();
        for (const auto& a : out.back().attractors)
            if (a.kind != AttractorKind::equilibrium) carried.push_back(a.point);
    }
    return out;
}

// ============================================================================
// Scans
// ============================================================================

std::string_view to_string(Classifier c) {
    switch (c) {
        case Classifier::count: return "count";
        case Classifier::regime: return "regime";
        case Classifier::attractor: return "attractor";
    }
    return "?";
}

Classifier parse_classifier(const std::string& name) {
    if (name == "count" || name == "equilibrium-count") return Classifier::count;
    if (name == "regime") return Classifier::regime;
    if (name == "attractor") return Classifier::attractor;
    throw PreconditionError("unknown classifier '" + name + "'");
}

void ScanConfig::validate() const {
    if (grid.nx < 2 || grid.ny < 2) throw PreconditionError("scan: resolution must be at least 2 per axis");
    if (!(grid.mu1_hi > grid.mu1_lo) || !(grid.mu2_hi > grid.mu2_lo))
        throw PreconditionError("scan: empty parameter rectangle");
    if (!(regime.tol > 0.0) || !(regime.T_max > 0.0) || !(regime.search.tol_root > 0.0))
        throw PreconditionError("scan: tolerances must be positive");
}

RasterLayer ScanResult::raster() const {
    RasterLayer r;
    r.grid = config.grid;
    for (const auto& c : cells) r.codes.push_back(c.code);
    switch (config.classifier) {
        case Classifier::count: r.legend = count_legend(); break;
        case Classifier::regime: r.legend = regime_legend(); break;
        case Classifier::attractor: r.legend = attractor_legend(); break;
    }
    return r;
}

ScanResult scan(const ScanConfig& config) {
    config.validate();
    ScanResult res;
    res.config = config;
    const ParameterGrid& g = config.grid;
    res.cells.resize(g.cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) res.cells[static_cast<std::size_t>(j) * g.nx + i].mu = {g.mu1(i), g.mu2(j)};
    const unsigned threads = config.threads == 0 ? default_threads() : config.threads;

    switch (config.classifier) {
        case Classifier::count: {
            const CountRaster counts = equilibrium_count_map(config.family, g, config.regime.search, threads);
            for (std::size_t k = 0; k < res.cells.size(); ++k) {
                res.cells[k].equilibria = counts.counts[k];
                res.cells[k].code = counts.counts[k];
            }
            break;
        }
        case Classifier::regime: {
            parallel_for(res.cells.size(), threads, [&](std::size_t k) {
                ScanCell& c = res.cells[k];
                RegimeOptions o = config.regime;
                o.seed = mix_seed(config.seed, k);
                try {
                    c.regime = classify_regime(config.family.at(c.mu.x1, c.mu.x2), o);
                } catch (const std::exception& e) {
                    c.regime = {};
                    c.regime.evidence.note = e.what();
                }
                c.equilibria = c.regime.evidence.equilibria;
                c.code = color_code(c.regime.kind);
                c.note = c.regime.evidence.note;
            });
            break;
        }
        case Classifier::attractor: {
            auto cell = [&](std::size_t k, const std::vector<Vec2>& carried) {
                ScanCell& c = res.cells[k];
                AttractorOptions o = config.attractor;
                o.regime = config.regime;
                o.regime.seed = mix_seed(config.seed, k);
                o.seeds.insert(o.seeds.end(), carried.begin(), carried.end());
                try {
                    c.attractor = attractor_classify(config.family.at(c.mu.x1, c.mu.x2), o);
                } catch (const std::exception& e) {
                    c.attractor = {};
                    c.attractor.unresolved = true;
                    c.attractor.note = e.what();
                }
                c.equilibria = c.attractor.equilibria;
                c.code = c.attractor.color_code();
                c.note = c.attractor.note;
            };
            if (config.continuation) {
                parallel_for(static_cast<std::size_t>(g.nx), threads, [&](std::size_t i) {
                    std::vector<Vec2> carried;
                    for (int j = g.ny - 1; j >= 0; --j) {
                        const std::size_t k = static_cast<std::size_t>(j) * g.nx + i;
                        cell(k, carried);
                        carried.clear();
                        for (const auto& a : res.cells[k].attractor.attractors)
                            if (a.kind != AttractorKind::equilibrium) carried.push_back(a.point);
                    }
                });
            } else {
                parallel_for(res.cells.size(), threads, [&](std::size_t k) { cell(k, {}); });
            }
            break;
        }
    }
    return res;
}

void write_scan_csv(std::ostream& out, const ScanResult& r) {
    CsvWriter w(out);
    switch (r.config.classifier) {
        case Classifier::count:
            w.header({"mu1", "mu2", "equilibria"});
            for (const auto& c : r.cells) {
                w.cell(c.mu.x1).cell(c.mu.x2).cell(c.equilibria);
                w.end_row();
            }
            break;
        case Classifier::regime:
            w.header({"mu1", "mu2", "equilibria", "regime", "p", "q", "code", "angle"});
            for (const auto& c : r.cells) {
                const auto& d = c.regime.evidence.direction;
                const double angle = d && !d->zero ? d->angle() : std::numeric_limits<double>::quiet_NaN();
                w.cell(c.mu.x1).cell(c.mu.x2).cell(c.equilibria).cell(to_string(c.regime.kind));
                w.cell(c.regime.type.p).cell(c.regime.type.q).cell(c.code).cell(angle);
                w.end_row();
            }
            break;
        case Classifier::attractor:
            w.header({"mu1", "mu2", "equilibria", "code", "equilibrium_attractors", "periodic_attractors",
                      "periodic_types", "quasiperiodic", "coexistence"});
            for (const auto& c : r.cells) {
                std::string types;
                for (const auto& a : c.attractor.attractors) {
                    if (a.kind != AttractorKind::periodic_orbit) continue;
                    if (!types.empty()) types += ';';
                    types += std::to_string(a.type.p) + ":" + std::to_string(a.type.q);
                }
                w.cell(c.mu.x1).cell(c.mu.x2).cell(c.equilibria).cell(c.code);
                w.cell(c.attractor.count(AttractorKind::equilibrium)).cell(c.attractor.count(AttractorKind::periodic_orbit));
                w.cell(std::string_view(types)).cell(c.attractor.count(AttractorKind::quasiperiodic));
                w.cell(c.attractor.coexistence ? 1 : 0);
                w.end_row();
            }
            break;
    }
}

void write_scan_json(std::ostream& out, const ScanResult& r) {
    const ScanConfig& c = r.config;
    nlohmann::json j;
    j["name"] = c.name;
    j["family"] = {{"name", c.family.name()},
                   {"delta1", c.family.delta1},
                   {"delta2", c.family.delta2},
                   {"L", c.family.L},
                   {"reversed", c.family.reversed}};
    j["grid"] = {{"mu1", {c.grid.mu1_lo, c.grid.mu1_hi}},
                 {"mu2", {c.grid.mu2_lo, c.grid.mu2_hi}},
                 {"nx", c.grid.nx},
                 {"ny", c.grid.ny}};
    j["classifier"] = std::string(to_string(c.classifier));
    j["seed"] = c.seed;
    std::map<int, int> hist;
    for (const auto& cell : r.cells) ++hist[cell.code];
    nlohmann::json h = nlohmann::json::object();
    for (const auto& [code, n] : hist) h[std::to_string(code)] = n;
    j["histogram"] = h;
    out << j.dump(2) << '\n';
}

std::vector<std::string> preset_names() {
    return {"uncoupled-counts",      "explicit-regimes",      "box-counts",
            "tpoint-regimes",        "excitatory-attractors", "inhibitory-attractors"};
}

ScanConfig preset(const std::string& name) {
    ScanConfig c;
    c.name = name;
    if (name == "uncoupled-counts") {
        c.family = Family::uncoupled();
        c.grid = {-0.1, 0.1, -0.1, 0.1, 101, 101};
        c.classifier = Classifier::count;
    } else if (name == "explicit-regimes") {
        c.family = Family::explicit_family(0.01, 0.006);
        c.grid = {-0.15, 0.15, -0.15, 0.15, 61, 61};
        c.classifier = Classifier::regime;
    } else if (name == "box-counts") {
        c.family = Family::reduced_box(0.5, 0.3);
        c.grid = {-0.4, 0.1, -0.3, 0.1, 201, 201};
        c.classifier = Classifier::count;
    } else if (name == "tpoint-regimes") {
        c.family = Family::sine_box(0.1, 0.1);
        c.grid = {-0.03, 0.0, -0.03, 0.0, 61, 61};
        c.classifier = Classifier::regime;
    } else if (name == "excitatory-attractors" || name == "inhibitory-attractors") {
        c.family = Family::sine_box(0.5, 0.5);
        if (name == "inhibitory-attractors") c.family = c.family.time_reversed();
        c.grid = {-0.4, 0.3, -0.4, 0.3, 36, 36};
        c.classifier = Classifier::attractor;
    } else {
        throw PreconditionError("unknown preset '" + name + "'");
    }
    return c;
}

std::string render_scan_svg(const ScanResult& r, const std::string& title) {
    const ScanConfig& c = r.config;
    const RasterLayer raster = r.raster();
    const ParameterGrid& g = c.grid;
    const Vec2 lo{g.mu1_lo, g.mu2_lo};
    const Vec2 hi{g.mu1_hi, g.mu2_hi};
    std::vector<CurveLayer> curves;
    std::optional<Vec2> marker;
    const double d1 = std::abs(c.family.delta1);
    const double d2 = std::abs(c.family.delta2);
    if (c.family.kind != FamilyKind::custom && c.family.delta1 * c.family.delta2 > 0.0) {
        curves = analytic_curve_layers(d1, d2, lo, hi);
        marker = cusp(d1, d2).mu;
    }
    SvgStyle style;
    style.title = title.empty() ? (c.name.empty() ? c.family.name() : c.name) : title;
    return render_svg(raster, curves, marker, style);
}

}  // namespace snic
