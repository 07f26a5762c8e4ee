#include "snictorus/rotation.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "snictorus/parallel.hpp"

namespace snic {

namespace {

constexpr double capture_speed = 1e-10;

double angle_between(Vec2 a, Vec2 b) { return std::abs(std::atan2(a.x1 * b.x2 - a.x2 * b.x1, dot(a, b))); }

// Three-point Gauss-Legendre integral of div v along a dense segment over [a, b].
double segment_divergence(const Field& f, const DenseSegment& seg, double a, double b) {
    if (!(b > a)) return 0.0;
    static constexpr double nodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) sum += weights[i] * f.divergence(seg.at(mid + half * nodes[i]));
    return half * sum;
}

struct Walk {
    std::vector<Sample> hits;
    double divergence = 0.0;
    bool captured = false;
};

// Crossings of the successive levels section.c, section.c + step, ... in the direction of step.
Walk walk_levels(const Field& f, Vec2 p0, LinearSection section, double step, int count, double tol, double budget,
                 bool with_divergence) {
    Walk w;
    if (count <= 0) return w;
    section.direction = step > 0.0 ? 1 : -1;
    drive(f, p0, budget, stepper_options(tol), [&](const DenseSegment& seg) {
        double t_from = seg.t0;
        while (auto t = find_crossing(seg, section)) {
            if (*t < t_from) break;
            if (with_divergence) w.divergence += segment_divergence(f, seg, t_from, *t);
            t_from = *t;
            w.hits.push_back({*t, seg.at(*t)});
            if (static_cast<int>(w.hits.size()) == count) return false;
            section.c += step;
        }
        if (with_divergence) w.divergence += segment_divergence(f, seg, t_from, seg.t1());
        if (norm(f(seg.end())) < capture_speed) {
            w.captured = true;
            return false;
        }
        return true;
    });
    return w;
}

long long gcd_ll(long long a, long long b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

}  // namespace

// ============================================================================
// Homology direction
// ============================================================================

HomologyDirection homology_direction(const Field& f, Vec2 p0, double T_max, double tol) {
    if (!(T_max > 0.0)) throw PreconditionError("homology_direction: T_max must be positive");
    const TorusGeometry& g = f.geometry();
    HomologyDirection out;
    const double t_half = 0.5 * T_max;
    Vec2 half = p0;
    Vec2 last = p0;
    double t_last = 0.0;
    bool half_set = false;
    bool failed = false;
    try {
        drive(f, p0, T_max, stepper_options(tol), [&](const DenseSegment& seg) {
            if (!half_set && seg.t1() >= t_half) {
                half = seg.at(t_half);
                half_set = true;
            }
            last = seg.end();
            t_last = seg.t1();
            // A captured orbit stays put, so its later positions are known.
            return norm(f(last)) >= capture_speed;
        });
    } catch (const StiffnessError& e) {
        last = e.last_state;
        t_last = e.last_time;
        failed = true;
    }
    if (!half_set) half = last;
    out.time = t_last;
    out.revolutions = g.revolutions(last - p0);
    const double size = norm(out.revolutions);
    if (failed) {
        out.zero = false;
        out.h = size > 0.0 ? (1.0 / size) * out.revolutions : Vec2{};
        out.confidence = std::numbers::pi;
        return out;
    }
    const Vec2 tail = out.revolutions - g.revolutions(half - p0);
    // An orbit that completes no revolution over the second half has been captured after
    // a transient, however long the transient winding was.
    if (size < 2.0 || norm(tail) < 1.0) {
        out.zero = true;
        out.h = {};
        out.confidence = 0.0;
        return out;
    }
    out.zero = false;
    out.h = (1.0 / size) * out.revolutions;
    const double drift = norm(tail) > 0.0 ? angle_between(out.h, tail) : std::numbers::pi;
    out.confidence = std::max(drift, 2.0 / size);
    return out;
}

// ============================================================================
// Cross sections
// ============================================================================

std::string_view to_string(SectionKind k) {
    switch (k) {
        case SectionKind::diagonal: return "diagonal";
        case SectionKind::x1_const: return "x1";
        case SectionKind::x2_const: return "x2";
    }
    return "?";
}

Vec2 CrossSection::normal(const TorusGeometry& g) const {
    switch (kind) {
        case SectionKind::diagonal: return {1.0 / g.L1, 1.0 / g.L2};
        case SectionKind::x1_const: return {1.0 / g.L1, 0.0};
        case SectionKind::x2_const: return {0.0, 1.0 / g.L2};
    }
    return {};
}

std::optional<CrossSection> find_global_cross_section(const Field& f, int grid) {
    const TorusGeometry& g = f.geometry();
    if (!g.periodic) return std::nullopt;
    if (grid < 4) throw PreconditionError("find_global_cross_section: grid must be at least 4");
    constexpr SectionKind kinds[3] = {SectionKind::diagonal, SectionKind::x1_const, SectionKind::x2_const};
    double lo[3], hi[3], lip[3];
    for (int k = 0; k < 3; ++k) {
        lo[k] = std::numeric_limits<double>::infinity();
        hi[k] = -lo[k];
        lip[k] = 0.0;
    }
    const double h1 = g.L1 / grid;
    const double h2 = g.L2 / grid;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const Vec2 p{(i + 0.5) * h1, (j + 0.5) * h2};
            const Vec2 v = f(p);
            const Mat2 J = f.jacobian(p);
            for (int k = 0; k < 3; ++k) {
                const Vec2 n = CrossSection{kinds[k], 1, 0.0}.normal(g);
                const double s = dot(n, v);
                lo[k] = std::min(lo[k], s);
                hi[k] = std::max(hi[k], s);
                const Vec2 grad{J.a11 * n.x1 + J.a21 * n.x2, J.a12 * n.x1 + J.a22 * n.x2};
                lip[k] = std::max(lip[k], norm(grad));
            }
        }
    }
    // Every torus point lies within half a cell diagonal of a sample; the factor 1.25
    // covers the gradient varying between samples.
    const double reach = 0.5 * std::hypot(h1, h2);
    for (int k = 0; k < 3; ++k) {
        const double margin = 1.25 * lip[k] * reach;
        if (lo[k] - margin > 0.0) return CrossSection{kinds[k], 1, lo[k] - margin};
        if (-hi[k] - margin > 0.0) return CrossSection{kinds[k], -1, -hi[k] - margin};
    }
    return std::nullopt;
}

bool has_global_cross_section(const Field& f, int grid) { return find_global_cross_section(f, grid).has_value(); }

std::optional<CrossSection> find_transversal_circle(const Field& f, int grid) {
    const TorusGeometry& g = f.geometry();
    if (!g.periodic) return std::nullopt;
    if (grid < 4) throw PreconditionError("find_transversal_circle: grid must be at least 4");
    std::optional<CrossSection> best;
    for (SectionKind kind : {SectionKind::x1_const, SectionKind::x2_const}) {
        const bool on_x1 = kind == SectionKind::x1_const;
        const double L_axis = on_x1 ? g.L1 : g.L2;
        const double L_along = on_x1 ? g.L2 : g.L1;
        const double h = L_along / grid;
        for (int j = 0; j < grid; ++j) {
            const double level = static_cast<double>(j) / grid;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            double lip = 0.0;
            for (int i = 0; i < grid; ++i) {
                const double s = (i + 0.5) * h;
                const Vec2 p = on_x1 ? Vec2{level * L_axis, s} : Vec2{s, level * L_axis};
                const Vec2 v = f(p);
                const Mat2 J = f.jacobian(p);
                const double val = (on_x1 ? v.x1 : v.x2) / L_axis;
                lo = std::min(lo, val);
                hi = std::max(hi, val);
                lip = std::max(lip, std::abs(on_x1 ? J.a12 : J.a21) / L_axis);
            }
            const double margin = 1.25 * lip * 0.5 * h;
            for (int sign : {1, -1}) {
                const double m = (sign > 0 ? lo : -hi) - margin;
                if (m > 0.0 && (!best || m > best->margin)) best = CrossSection{kind, sign, m, level, false};
            }
        }
    }
    return best;
}

// ============================================================================
// Return map
// ============================================================================

ReturnMap::ReturnMap(Field f, CrossSection s, double tol) : field_(std::move(f)), section_(s), tol_(tol) {
    const TorusGeometry& g = field_.geometry();
    if (!g.periodic) throw PreconditionError("ReturnMap: field is not periodic");
    if (!(section_.margin > 0.0)) throw PreconditionError("ReturnMap: section margin must be positive");
    period_ = section_.kind == SectionKind::x1_const ? g.L2 : g.L1;
    // Along a global section n . x grows at least at rate margin.
    budget_ = section_.global ? 1.5 / section_.margin + 1.0 : 1e4;
}

Vec2 ReturnMap::point(double u) const {
    const TorusGeometry& g = field_.geometry();
    switch (section_.kind) {
        case SectionKind::diagonal: return {u, g.L2 * (section_.level - u / g.L1)};
        case SectionKind::x1_const: return {section_.level * g.L1, u};
        case SectionKind::x2_const: return {u, section_.level * g.L2};
    }
    return {};
}

namespace {

double section_coordinate(SectionKind kind, Vec2 p) { return kind == SectionKind::x1_const ? p.x2 : p.x1; }

}  // namespace

std::vector<double> ReturnMap::orbit(double u, int n) const {
    std::vector<double> out{u};
    if (n <= 0) return out;
    const Vec2 nrm = section_.normal(field_.geometry());
    const LinearSection first{nrm.x1, nrm.x2, section_.level + section_.sign, 0};
    const Walk w = walk_levels(field_, point(u), first, static_cast<double>(section_.sign), n, tol_, budget_ * n,
                               false);
    if (static_cast<int>(w.hits.size()) < n) throw ConvergenceError("ReturnMap: orbit did not return to the section");
    for (const auto& h : w.hits) out.push_back(section_coordinate(section_.kind, h.p));
    return out;
}

double ReturnMap::iterate(double u, int n) const { return orbit(u, n).back(); }

Vec2 ReturnMap::revolutions(int n, double du) const {
    const TorusGeometry& g = field_.geometry();
    const double s = section_.sign * static_cast<double>(n);
    switch (section_.kind) {
        case SectionKind::diagonal: return {du / g.L1, s - du / g.L1};
        case SectionKind::x1_const: return {s, du / g.L2};
        case SectionKind::x2_const: return {du / g.L1, s};
    }
    return {};
}

double ReturnMap::divergence_integral(double u, int n) const {
    const Vec2 nrm = section_.normal(field_.geometry());
    const LinearSection first{nrm.x1, nrm.x2, section_.level + section_.sign, 0};
    const Walk w = walk_levels(field_, point(u), first, static_cast<double>(section_.sign), n, tol_, budget_ * n, true);
    if (static_cast<int>(w.hits.size()) < n) throw ConvergenceError("ReturnMap: orbit did not return to the section");
    return w.divergence;
}

RotationEstimate rotation_number(const ReturnMap& map, double u0, int returns) {
    if (returns <= 0) throw PreconditionError("rotation_number: returns must be positive");
    const auto orb = map.orbit(u0, returns);
    RotationEstimate est;
    est.returns = returns;
    est.rho = (orb.back() - u0) / (returns * map.period());
    est.confidence = 1.0 / returns;
    return est;
}

Homotopy normalize_homotopy(long long p, long long q) {
    if (p == 0 && q == 0) throw PreconditionError("normalize_homotopy: (0, 0) has no direction");
    const long long d = gcd_ll(p, q);
    p /= d;
    q /= d;
    if (p < 0 || (p == 0 && q < 0)) {
        p = -p;
        q = -q;
    }
    return {static_cast<int>(p), static_cast<int>(q)};
}

std::vector<PeriodicOrbit> find_periodic_orbits(const ReturnMap& map, const RotationEstimate& rho, int q_max,
                                                int samples, double tol) {
    std::vector<PeriodicOrbit> found;
    const double P = map.period();
    const double eps = rho.confidence + 1e-12;
    const TorusGeometry& g = map.field().geometry();
    for (int n = 1; n <= q_max && found.empty(); ++n) {
        const long long a_lo = static_cast<long long>(std::ceil(n * (rho.rho - eps)));
        const long long a_hi = static_cast<long long>(std::floor(n * (rho.rho + eps)));
        for (long long a = a_lo; a <= a_hi; ++a) {
            if (gcd_ll(a, n) != 1) continue;
            const double shift = static_cast<double>(a) * P;
            auto G = [&](double u) { return map.iterate(u, n) - u - shift; };
            std::vector<double> us(samples + 1), gs(samples + 1);
            double gmax = 0.0;
            for (int i = 0; i <= samples; ++i) {
                us[i] = P * i / samples;
                gs[i] = i == samples ? gs[0] : G(us[i]);
                gmax = std::max(gmax, std::abs(gs[i]));
            }
            std::vector<double> roots;
            if (gmax < tol) {
                // Every point is periodic (a rigid rotation).
                roots.push_back(0.0);
            } else {
                for (int i = 0; i < samples; ++i) {
                    if (gs[i] == 0.0) {
                        roots.push_back(us[i]);
                        continue;
                    }
                    if ((gs[i] < 0.0) == (gs[i + 1] < 0.0) || gs[i + 1] == 0.0) continue;
                    boost::uintmax_t iters = 100;
                    auto stop = [&](double l, double r) { return std::abs(r - l) < 1e-13 * P; };
                    const auto r = boost::math::tools::toms748_solve(G, us[i], us[i + 1], gs[i], gs[i + 1], stop, iters);
                    roots.push_back(0.5 * (r.first + r.second));
                }
            }
            for (double u : roots) {
                const double res = std::abs(G(u));
                if (!(res < tol)) continue;
                PeriodicOrbit orb;
                orb.point = map.point(u);
                orb.returns = n;
                const Vec2 rev = map.revolutions(n, shift);
                orb.type = normalize_homotopy(std::llround(rev.x1), std::llround(rev.x2));
                orb.residual = res;
                orb.floquet_exponent = map.divergence_integral(u, n);
                const double h = 1e-6 * P;
                orb.multiplier = (map.iterate(u + h, n) - map.iterate(u - h, n)) / (2.0 * h);
                const Vec2 nrm = map.section().normal(g);
                const LinearSection first{nrm.x1, nrm.x2, nrm.x1 * orb.point.x1 + nrm.x2 * orb.point.x2 +
                                                              map.section().sign,
                                          0};
                const Walk w = walk_levels(map.field(), orb.point, first, static_cast<double>(map.section().sign), n,
                                           1e-11, 1e6, false);
                orb.period = w.hits.empty() ? 0.0 : w.hits.back().t;
                found.push_back(orb);
            }
        }
    }
    return found;
}

std::optional<Homotopy> rational_direction(Vec2 v, int q_max, double tol_angle) {
    if (norm(v) == 0.0) return std::nullopt;
    std::optional<Homotopy> best;
    int best_size = std::numeric_limits<int>::max();
    double best_err = std::numeric_limits<double>::infinity();
    for (int p = -q_max; p <= q_max; ++p) {
        for (int q = -q_max; q <= q_max; ++q) {
            if ((p == 0 && q == 0) || std::gcd(p, q) != 1) continue;
            const double err = angle_between(v, Vec2{static_cast<double>(p), static_cast<double>(q)});
            if (err > tol_angle) continue;
            const int size = std::max(std::abs(p), std::abs(q));
            if (size < best_size || (size == best_size && err < best_err)) {
                best = Homotopy{p, q};
                best_size = size;
                best_err = err;
            }
        }
    }
    return best;
}

std::optional<PeriodicOrbit> converge_periodic_orbit(const Field& f, Vec2 p, Homotopy winding, double tol,
                                                     int max_iter) {
    const TorusGeometry& g = f.geometry();
    if (!g.periodic) throw PreconditionError("converge_periodic_orbit: field is not periodic");
    if (winding.p == 0 && winding.q == 0) throw PreconditionError("converge_periodic_orbit: zero winding");
    const bool along_x2 = std::abs(winding.q) >= std::abs(winding.p);
    const int m = std::abs(along_x2 ? winding.q : winding.p);
    const double s = (along_x2 ? winding.q : winding.p) > 0 ? 1.0 : -1.0;
    const double L_axis = along_x2 ? g.L2 : g.L1;
    const double L_other = along_x2 ? g.L1 : g.L2;
    const double level0 = along_x2 ? p.x2 : p.x1;
    const double shift = (along_x2 ? winding.p : winding.q) * L_other;
    const double step = s * L_axis;
    const LinearSection first = along_x2 ? LinearSection::x2_equals(level0 + step) : LinearSection::x1_equals(level0 + step);
    auto at = [&](double u) { return along_x2 ? Vec2{u, level0} : Vec2{level0, u}; };
    auto coord = [&](Vec2 q) { return along_x2 ? q.x1 : q.x2; };
    const double int_tol = std::min(1e-10, 0.1 * tol);
    const double budget = 1e4;
    auto R = [&](double u) -> std::optional<double> {
        const Walk w = walk_levels(f, at(u), first, step, m, int_tol, budget, false);
        if (static_cast<int>(w.hits.size()) < m) return std::nullopt;
        return coord(w.hits.back().p) - shift;
    };

    double u0 = coord(p);
    auto r0 = R(u0);
    if (!r0) return std::nullopt;
    double G0 = *r0 - u0;
    double u1 = *r0;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        auto r1 = R(u1);
        if (!r1) return std::nullopt;
        const double G1 = *r1 - u1;
        if (std::abs(G1) < tol) {
            converged = true;
            break;
        }
        double next = *r1;
        if (G1 != G0) {
            const double secant = u1 - G1 * (u1 - u0) / (G1 - G0);
            if (std::isfinite(secant) && std::abs(secant - u1) < 0.25 * L_other) next = secant;
        }
        u0 = u1;
        G0 = G1;
        u1 = next;
    }
    if (!converged) return std::nullopt;

    PeriodicOrbit orb;
    orb.point = at(u1);
    orb.returns = m;
    orb.type = normalize_homotopy(winding.p, winding.q);
    orb.residual = std::abs(*R(u1) - u1);
    const Walk w = walk_levels(f, orb.point, first, step, m, int_tol, budget, true);
    if (static_cast<int>(w.hits.size()) < m) return std::nullopt;
    orb.period = w.hits.back().t;
    orb.floquet_exponent = w.divergence;
    const double h = 1e-6 * L_other;
    const auto rp = R(u1 + h);
    const auto rm = R(u1 - h);
    orb.multiplier = rp && rm ? (*rp - *rm) / (2.0 * h) : std::exp(orb.floquet_exponent);
    return orb;
}

// ============================================================================
// Regime classification
// ============================================================================

std::string_view to_string(RegimeKind k) {
    switch (k) {
        case RegimeKind::poincare: return "Poincare";
        case RegimeKind::poincare_irrational: return "PoincareIrrational";
        case RegimeKind::cherry: return "Cherry";
        case RegimeKind::fully_mode_locked: return "FullyModeLocked";
        case RegimeKind::unresolved: return "Unresolved";
    }
    return "?";
}

int color_code(RegimeKind k) {
    switch (k) {
        case RegimeKind::unresolved: return 0;
        case RegimeKind::fully_mode_locked: return 1;
        case RegimeKind::cherry: return 2;
        case RegimeKind::poincare: return 3;
        case RegimeKind::poincare_irrational: return 4;
    }
    return 0;
}

namespace {

RegimeLabel classify_poincare(const Field& f, const RegimeOptions& opts, RegimeLabel out) {
    auto section = find_global_cross_section(f);
    out.evidence.cross_section = section.has_value();
    if (!section) {
        section = find_transversal_circle(f);
        if (!section) {
            out.evidence.note = "no certified cross-section";
            return out;
        }
        out.evidence.note = "closed transversal " + std::string(to_string(section->kind)) + " level " +
                            std::to_string(section->level);
    }
    const ReturnMap map(f, *section, std::min(1e-10, 0.1 * opts.tol));
    const RotationEstimate est = rotation_number(map, 0.0, opts.returns);
    out.evidence.rotation = est.rho;

    HomologyDirection dir;
    dir.zero = false;
    dir.revolutions = map.revolutions(1, est.rho * map.period());
    dir.h = (1.0 / norm(dir.revolutions)) * dir.revolutions;
    const Vec2 lo = map.revolutions(1, (est.rho - est.confidence) * map.period());
    const Vec2 hi = map.revolutions(1, (est.rho + est.confidence) * map.period());
    dir.confidence = std::max(angle_between(dir.h, lo), angle_between(dir.h, hi));

    const auto orbits = find_periodic_orbits(map, est, opts.q_max, 48, std::max(opts.tol, 1e-8));
    if (!orbits.empty()) {
        const PeriodicOrbit& orb = orbits.front();
        // The located orbit fixes the direction exactly.
        const long long a = std::llround(est.rho * orb.returns);
        dir.revolutions = map.revolutions(orb.returns, static_cast<double>(a) * map.period());
        dir.h = (1.0 / norm(dir.revolutions)) * dir.revolutions;
        dir.confidence = 0.0;
        out.kind = RegimeKind::poincare;
        out.type = orb.type;
    } else {
        out.kind = RegimeKind::poincare_irrational;
    }
    out.evidence.direction = dir;
    return out;
}

RegimeLabel classify_with_equilibria(const Field& f, const RegimeOptions& opts, RegimeLabel out) {
    const TorusGeometry& g = f.geometry();
    const Region region = default_region(f);
    const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(opts.orbit_samples)))));
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec2> starts;
    for (int n = 0; n < opts.orbit_samples; ++n) {
        const int i = n % side;
        const int j = (n / side) % side;
        const double a = (i + unit(rng)) / side;
        const double b = (j + unit(rng)) / side;
        starts.push_back({region.lo.x1 + a * (region.hi.x1 - region.lo.x1), region.lo.x2 + b * (region.hi.x2 - region.lo.x2)});
    }
    std::optional<Homotopy> type;
    std::optional<HomologyDirection> witness;
    bool ambiguous = false;
    for (const Vec2& p : starts) {
        const HomologyDirection hd = homology_direction(f, p, opts.T_max, opts.tol);
        if (hd.zero) {
            ++out.evidence.bounded_orbits;
            continue;
        }
        ++out.evidence.winding_orbits;
        if (!g.periodic || hd.confidence >= 0.5) {
            ambiguous = true;
            continue;
        }
        const auto t = rational_direction(hd.revolutions, opts.q_max, hd.confidence);
        if (!t) {
            ambiguous = true;
            continue;
        }
        const Homotopy nt = normalize_homotopy(t->p, t->q);
        if (type && !(*type == nt)) ambiguous = true;
        type = nt;
        if (!witness) witness = hd;
    }
    if (witness) out.evidence.direction = witness;
    if (ambiguous) {
        out.evidence.note = "winding orbits without a consistent rational direction";
        return out;
    }
    if (out.evidence.winding_orbits == 0) {
        out.kind = RegimeKind::fully_mode_locked;
        return out;
    }
    out.kind = RegimeKind::cherry;
    out.type = *type;
    return out;
}

}  // namespace

RegimeLabel classify_regime(const Field& f, const RegimeOptions& opts) {
    RegimeLabel out;
    try {
        const auto eqs = find_equilibria(f, opts.search);
        out.evidence.equilibria = static_cast<int>(eqs.size());
        if (eqs.empty()) {
            if (!f.geometry().periodic) {
                out.evidence.note = "planar field without equilibria";
                return out;
            }
            return classify_poincare(f, opts, out);
        }
        return classify_with_equilibria(f, opts, out);
    } catch (const NumericalError& e) {
        out.kind = RegimeKind::unresolved;
        out.type = {};
        out.evidence.note = e.what();
        return out;
    }
}

std::vector<WindingSample> winding_sweep(const Family& family, double K, double lambda_lo, double lambda_hi, int n,
                                         const RegimeOptions& opts, unsigned threads) {
    if (n <= 0) throw PreconditionError("winding_sweep: n must be positive");
    std::vector<WindingSample> out(static_cast<std::size_t>(n));
    parallel_for(out.size(), threads == 0 ? default_threads() : threads, [&](std::size_t i) {
        WindingSample& s = out[i];
        s.lambda = n == 1 ? lambda_lo : lambda_lo + (lambda_hi - lambda_lo) * static_cast<double>(i) / (n - 1);
        s.mu = {0.5 * K - s.lambda, 0.5 * K + s.lambda};
        s.label = classify_regime(family.at(s.mu.x1, s.mu.x2), opts);
        if (s.label.evidence.direction && !s.label.evidence.direction->zero) {
            s.angle = s.label.evidence.direction->angle();
            s.confidence = s.label.evidence.direction->confidence;
        } else {
            s.angle = std::numeric_limits<double>::quiet_NaN();
            s.confidence = std::numeric_limits<double>::infinity();
        }
    });
    return out;
}

}  // namespace snic
