#include "snictorus/separatrix.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "snictorus/parallel.hpp"

namespace snic {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool same_point(Vec2 a, Vec2 b, const TorusGeometry& g) { return g.torus_distance(a, b) < 1e-8; }

int round_int(double x) { return static_cast<int>(std::lround(x)); }

char opposite_label(char c) { return c == '?' ? '?' : static_cast<char>(c - 'A' + 'a'); }

}  // namespace

// ============================================================================
// Saddle branches
// ============================================================================

Vec2 centered(Vec2 p, const TorusGeometry& g) {
    if (!g.periodic) return p;
    return {p.x1 - g.L1 * std::floor(p.x1 / g.L1 + 0.5), p.x2 - g.L2 * std::floor(p.x2 / g.L2 + 0.5)};
}

SaddleBranch SaddleBranch::translated(int m, int n, const TorusGeometry& g) const {
    SaddleBranch b = *this;
    b.saddle.p += Vec2{m * g.L1, n * g.L2};
    return b;
}

std::vector<SaddleBranch> saddle_branches(const Equilibrium& saddle, double h) {
    if (saddle.kind != EquilibriumKind::saddle || !saddle.eigenvectors)
        throw PreconditionError("saddle_branches: not a saddle");
    if (!(h > 0.0)) throw PreconditionError("saddle_branches: launch distance must be positive");
    const Vec2 u = (*saddle.eigenvectors)[0];
    const Vec2 w = (*saddle.eigenvectors)[1];
    return {{saddle, '?', Stability::unstable, u, h},
            {saddle, '?', Stability::unstable, -u, h},
            {saddle, '?', Stability::stable, w, h},
            {saddle, '?', Stability::stable, -w, h}};
}

double default_launch_offset(const Field& f) {
    const Vec2 d = f.linear_coupling();
    const double p = std::abs(d.x1 * d.x2);
    return p > 0.0 ? 1e-6 * std::sqrt(p) : 1e-7;
}

std::optional<BranchSet> label_branches(const Field& f, const std::vector<Equilibrium>& eqs, double h) {
    const TorusGeometry& g = f.geometry();
    if (h <= 0.0) h = default_launch_offset(f);
    std::vector<Equilibrium> saddles;
    for (const auto& e : eqs) {
        if (e.kind != EquilibriumKind::saddle || !e.eigenvectors) continue;
        Equilibrium c = e;
        c.p = centered(e.p, g);
        saddles.push_back(c);
    }
    if (saddles.empty()) return std::nullopt;

    auto pick = [&](int vec, bool vertical) {
        std::size_t best = 0;
        double score = -1.0;
        for (std::size_t i = 0; i < saddles.size(); ++i) {
            const Vec2 v = (*saddles[i].eigenvectors)[vec];
            const double s = std::abs(vertical ? v.x2 : v.x1);
            if (s > score) {
                score = s;
                best = i;
            }
        }
        return best;
    };
    auto oriented = [](Vec2 v, bool vertical, double sign) {
        const double c = vertical ? v.x2 : v.x1;
        return c * sign >= 0.0 ? v : -v;
    };

    BranchSet set;
    const std::size_t iD = pick(0, true);
    const std::size_t iB = pick(0, false);
    const std::size_t iA = pick(1, true);
    const std::size_t iC = pick(1, false);
    set.D = {saddles[iD], 'D', Stability::unstable, oriented((*saddles[iD].eigenvectors)[0], true, 1.0), h};
    set.B = {saddles[iB], 'B', Stability::unstable, oriented((*saddles[iB].eigenvectors)[0], false, 1.0), h};
    set.A = {saddles[iA], 'A', Stability::stable, oriented((*saddles[iA].eigenvectors)[1], true, -1.0), h};
    set.C = {saddles[iC], 'C', Stability::stable, oriented((*saddles[iC].eigenvectors)[1], false, -1.0), h};

    const std::array<const SaddleBranch*, 4> named{&set.A, &set.B, &set.C, &set.D};
    for (const auto& s : saddles) {
        for (SaddleBranch b : saddle_branches(s, h)) {
            for (const SaddleBranch* n : named) {
                if (!same_point(n->saddle.p, s.p, g) || n->stability != b.stability) continue;
                b.label = dot(n->direction, b.direction) > 0.0 ? n->label : opposite_label(n->label);
                break;
            }
            set.all.push_back(b);
        }
    }
    return set;
}

// ============================================================================
// Tracing
// ============================================================================

std::string_view to_string(ConnectionKind k) {
    switch (k) {
        case ConnectionKind::sink_translate: return "sink_translate";
        case ConnectionKind::source_translate: return "source_translate";
        case ConnectionKind::section_exit: return "section_exit";
        case ConnectionKind::near_saddle: return "near_saddle";
        case ConnectionKind::escaped: return "escaped";
        case ConnectionKind::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

namespace {

ConnectionResult trace_impl(const Field& f, const SaddleBranch& b, const std::vector<Equilibrium>& eqs,
                            const TraceOptions& opts, const LinearSection* section) {
    const TorusGeometry& g = f.geometry();
    const double cr = opts.capture_radius > 0.0 ? opts.capture_radius : 1e-4 * std::min(g.L1, g.L2);
    const bool forward = b.stability == Stability::unstable;
    const Field tf = forward ? f : f.reversed();
    const EquilibriumKind attracting = forward ? EquilibriumKind::sink : EquilibriumKind::source;

    std::vector<int> nodes;
    std::vector<int> saddles;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        const auto k = eqs[i].kind;
        if (k == EquilibriumKind::saddle)
            saddles.push_back(static_cast<int>(i));
        else if (k == attracting || k == EquilibriumKind::saddle_node || k == EquilibriumKind::degenerate)
            nodes.push_back(static_cast<int>(i));
    }

    ConnectionResult r;
    r.branch = b.label;
    r.min_saddle_distance = inf;
    const Vec2 p0 = b.launch_point();
    if (opts.keep_trajectory) r.trajectory = Trajectory(0.0, p0);

    auto translate_of = [&](int idx, Vec2 x) {
        const Vec2 e = eqs[static_cast<std::size_t>(idx)].p;
        const Vec2 copy = x - g.torus_delta(e, x);
        const Vec2 ref = b.saddle.p + g.torus_delta(b.saddle.p, e);
        return std::array<int, 2>{g.periodic ? round_int((copy.x1 - ref.x1) / g.L1) : 0,
                                  g.periodic ? round_int((copy.x2 - ref.x2) / g.L2) : 0};
    };
    auto finish = [&](ConnectionKind k, int idx, Vec2 x, double t) {
        r.kind = k;
        r.target = idx;
        r.end = x;
        r.time = t;
        if (idx >= 0) {
            const auto mn = translate_of(idx, x);
            r.m = mn[0];
            r.n = mn[1];
        }
    };

    bool departed = false;
    bool done = false;
    int candidate = -1;
    auto inspect = [&](Vec2 x, double t) {
        if (!departed && g.torus_distance(x, b.saddle.p) > 100.0 * cr) departed = true;
        for (int i : saddles) {
            const Vec2 e = eqs[static_cast<std::size_t>(i)].p;
            if (!departed && same_point(e, b.saddle.p, g)) continue;
            const double d = g.torus_distance(e, x);
            r.min_saddle_distance = std::min(r.min_saddle_distance, d);
            if (d < 10.0 * cr) r.near_saddle_flag = true;
            if (d < cr) {
                finish(ConnectionKind::near_saddle, i, x, t);
                return true;
            }
        }
        for (int i : nodes) {
            const double d = g.torus_distance(eqs[static_cast<std::size_t>(i)].p, x);
            if (candidate == i) {
                if (d < 0.25 * cr) {
                    finish(forward ? ConnectionKind::sink_translate : ConnectionKind::source_translate, i, x, t);
                    return true;
                }
                if (d > 2.0 * cr) candidate = -1;
            } else if (candidate < 0 && d < cr) {
                candidate = i;
            }
        }
        if (!g.periodic && max_abs(x) > opts.escape_radius) {
            finish(ConnectionKind::escaped, -1, x, t);
            return true;
        }
        return false;
    };

    Vec2 last = p0;
    double t_last = 0.0;
    try {
        drive(tf, p0, opts.T_budget, stepper_options(opts.tol), [&](const DenseSegment& seg) {
            if (opts.keep_trajectory) r.trajectory.append(seg);
            last = seg.end();
            t_last = seg.t1();
            if (section) {
                if (auto tc = find_crossing(seg, *section)) {
                    for (int k = 1; k <= 4; ++k) {
                        const double t = seg.t0 + (*tc - seg.t0) * k / 4.0;
                        if (inspect(seg.at(t), t)) {
                            done = true;
                            return false;
                        }
                    }
                    finish(ConnectionKind::section_exit, -1, seg.at(*tc), *tc);
                    done = true;
                    return false;
                }
            }
            for (int k = 1; k <= 4; ++k) {
                const double t = seg.t0 + seg.h * k / 4.0;
                if (inspect(seg.at(t), t)) {
                    done = true;
                    return false;
                }
            }
            return true;
        });
    } catch (const StiffnessError& e) {
        if (g.periodic) throw;
        finish(ConnectionKind::escaped, -1, e.last_state, e.last_time);
        done = true;
    }
    if (!done) finish(ConnectionKind::budget_exceeded, -1, last, t_last);
    if (!std::isfinite(r.min_saddle_distance)) r.min_saddle_distance = 0.0;
    return r;
}

}  // namespace

ConnectionResult trace_branch(const Field& f, const SaddleBranch& b, const std::vector<Equilibrium>& eqs,
                              const TraceOptions& opts) {
    return trace_impl(f, b, eqs, opts, nullptr);
}

ConnectionResult trace_branch(const Field& f, const SaddleBranch& b, const TraceOptions& opts) {
    return trace_impl(f, b, find_equilibria(f), opts, nullptr);
}

ConnectionResult trace_to_section(const Field& f, const SaddleBranch& b, const LinearSection& section,
                                  const std::vector<Equilibrium>& eqs, const TraceOptions& opts) {
    return trace_impl(f, b, eqs, opts, &section);
}

// ============================================================================
// Section gaps and heteroclinic connections
// ============================================================================

double branch_gap_at_section(const Field& f, const SaddleBranch& first, const SaddleBranch& second, GapKind kind,
                             double eta, const std::vector<Equilibrium>& eqs, const TraceOptions& opts) {
    const TorusGeometry& g = f.geometry();
    if (!g.periodic) throw PreconditionError("branch_gap_at_section: needs a periodic field");
    const bool vertical = kind == GapKind::D_A01;
    const double L = vertical ? g.L2 : g.L1;
    if (!(eta > 0.0) || !(eta < L)) throw PreconditionError("branch_gap_at_section: eta outside (0, L)");
    const LinearSection sec = vertical ? LinearSection::x2_equals(L - eta) : LinearSection::x1_equals(L - eta);
    const SaddleBranch other = vertical ? second.translated(0, 1, g) : second.translated(1, 0, g);

    auto cross = [&](const SaddleBranch& b) {
        const ConnectionResult r = trace_to_section(f, b, sec, eqs, opts);
        if (r.kind != ConnectionKind::section_exit) {
            std::ostringstream msg;
            msg << "branch " << b.label << " did not cross the section (" << to_string(r.kind) << ")";
            throw BranchCrossingError(msg.str(), b.label);
        }
        return r.end;
    };
    const Vec2 a = cross(first);
    const Vec2 c = cross(other);
    return vertical ? c.x1 - a.x1 : c.x2 - a.x2;
}

double branch_gap_at_section(const Field& f, GapKind kind, double eta, const TraceOptions& opts) {
    const auto eqs = find_equilibria(f);
    const auto set = label_branches(f, eqs);
    if (!set) throw BranchCrossingError("branch_gap_at_section: no saddle", kind == GapKind::D_A01 ? 'D' : 'B');
    return kind == GapKind::D_A01 ? branch_gap_at_section(f, set->D, set->A, kind, eta, eqs, opts)
                                  : branch_gap_at_section(f, set->B, set->C, kind, eta, eqs, opts);
}

HeteroclinicRoot find_heteroclinic(const std::function<double(double)>& gap, double s0, double s1, double tol,
                                   double gap_tol, int max_evaluations) {
    if (!(tol > 0.0)) throw PreconditionError("find_heteroclinic: tol must be positive");
    HeteroclinicRoot root;
    double best_s = s0;
    double best_g = inf;
    auto eval = [&](double s) {
        const double v = gap(s);
        ++root.evaluations;
        if (std::abs(v) < std::abs(best_g)) {
            best_g = v;
            best_s = s;
        }
        return v;
    };
    const double g0 = eval(s0);
    const double g1 = eval(s1);
    if (!std::isfinite(g0) || !std::isfinite(g1) || (g0 > 0.0) == (g1 > 0.0)) {
        if (g0 == 0.0 || g1 == 0.0) {
            root.s = g0 == 0.0 ? s0 : s1;
            root.gap = 0.0;
            return root;
        }
        std::ostringstream msg;
        msg << "find_heteroclinic: no sign change on [" << s0 << ", " << s1 << "] (gaps " << g0 << ", " << g1 << ")";
        throw BracketError(msg.str());
    }
    struct Stop {
        double tol;
        double gap_tol;
        const double* best;
        bool operator()(double a, double b) const { return std::abs(b - a) <= tol || std::abs(*best) < gap_tol; }
    };
    std::uintmax_t iters = static_cast<std::uintmax_t>(std::max(1, max_evaluations - 2));
    const auto r = boost::math::tools::toms748_solve(eval, std::min(s0, s1), std::max(s0, s1), s0 < s1 ? g0 : g1,
                                                     s0 < s1 ? g1 : g0, Stop{tol, gap_tol, &best_g}, iters);
    const double mid = 0.5 * (r.first + r.second);
    root.s = std::abs(r.second - r.first) <= tol || best_s < r.first || best_s > r.second ? mid : best_s;
    if (root.s == mid && std::abs(best_g) >= gap_tol) {
        root.gap = eval(mid);
    } else {
        root.s = best_s;
        root.gap = best_g;
    }
    return root;
}

HeteroclinicRoot find_heteroclinic(const Family& family, const ParameterSlice& slice, GapKind kind, double eta,
                                   double s0, double s1, double tol, const TraceOptions& opts) {
    auto gap = [&](double s) {
        const Vec2 mu = slice.at(s);
        return branch_gap_at_section(family.at(mu.x1, mu.x2), kind, eta, opts);
    };
    HeteroclinicRoot r = find_heteroclinic(gap, s0, s1, tol);
    r.mu = slice.at(r.s);
    return r;
}

// ============================================================================
// Basic tartan
// ============================================================================

std::string_view to_string(TartanReason r) {
    switch (r) {
        case TartanReason::ok: return "ok";
        case TartanReason::not_periodic: return "not_periodic";
        case TartanReason::wrong_equilibrium_count: return "wrong_equilibrium_count";
        case TartanReason::wrong_equilibrium_kinds: return "wrong_equilibrium_kinds";
        case TartanReason::branch_not_captured: return "branch_not_captured";
        case TartanReason::pattern_mismatch: return "pattern_mismatch";
    }
    return "?";
}

TartanReport verify_basic_tartan(const Field& f, const TraceOptions& opts, unsigned threads) {
    TartanReport rep;
    const TorusGeometry& g = f.geometry();
    if (!g.periodic) {
        rep.reason = TartanReason::not_periodic;
        return rep;
    }
    rep.equilibria = find_equilibria(f);
    const auto& eqs = rep.equilibria;
    if (eqs.size() != 4) {
        rep.reason = TartanReason::wrong_equilibrium_count;
        rep.detail = std::to_string(eqs.size()) + " equilibria";
        return rep;
    }
    int sinks = 0, sources = 0, n_saddles = 0;
    for (const auto& e : eqs) {
        sinks += e.kind == EquilibriumKind::sink;
        sources += e.kind == EquilibriumKind::source;
        n_saddles += e.kind == EquilibriumKind::saddle;
    }
    if (sinks != 1 || sources != 1 || n_saddles != 2) {
        rep.reason = TartanReason::wrong_equilibrium_kinds;
        return rep;
    }
    const auto set = label_branches(f, eqs);
    const std::vector<SaddleBranch>& branches = set->all;
    rep.connections.resize(branches.size());
    parallel_for(branches.size(), threads == 0 ? default_threads() : threads,
                 [&](std::size_t i) { rep.connections[i] = trace_branch(f, branches[i], eqs, opts); });

    for (std::size_t i = 0; i < branches.size(); ++i) {
        if (!rep.connections[i].captured()) {
            rep.reason = TartanReason::branch_not_captured;
            rep.detail = std::string("branch ") + branches[i].label + " " +
                         std::string(to_string(rep.connections[i].kind));
            return rep;
        }
    }

    auto mismatch = [&](const std::string& why) {
        rep.reason = TartanReason::pattern_mismatch;
        rep.detail = why;
        return rep;
    };
    std::array<int, 2> unstable_axis{-1, -1};
    for (std::size_t s = 0; s < 2; ++s) {
        std::array<Vec2, 2> axis{};
        for (int stab = 0; stab < 2; ++stab) {
            int zero = 0;
            int unit = 0;
            for (std::size_t k = 0; k < 4; ++k) {
                const std::size_t i = 4 * s + k;
                if ((branches[i].stability == Stability::unstable) != (stab == 0)) continue;
                const ConnectionResult& c = rep.connections[i];
                if (c.m == 0 && c.n == 0) {
                    ++zero;
                } else if (std::abs(c.m) + std::abs(c.n) == 1) {
                    ++unit;
                    const Vec2 e{static_cast<double>(c.m), static_cast<double>(c.n)};
                    if (dot(e, branches[i].direction) <= 0.0)
                        return mismatch(std::string("branch ") + branches[i].label + " reaches the opposite side");
                    axis[stab] = e;
                }
            }
            if (zero != 1 || unit != 1) return mismatch("saddle " + std::to_string(s) + " targets not {0, e}");
        }
        if (dot(axis[0], axis[1]) != 0.0) return mismatch("saddle " + std::to_string(s) + " axes not orthogonal");
        unstable_axis[s] = axis[0].x1 != 0.0 ? 1 : 2;
    }
    if (unstable_axis[0] == unstable_axis[1]) return mismatch("both saddles circulate along the same axis");
    rep.basic = true;
    rep.reason = TartanReason::ok;
    return rep;
}

void write_connections_json(std::ostream& out, const std::vector<ConnectionResult>& connections,
                            const std::vector<Equilibrium>& eqs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : connections) {
        nlohmann::json j;
        j["branch"] = std::string(1, c.branch);
        j["kind"] = std::string(to_string(c.kind));
        j["target"] = c.target;
        if (c.target >= 0 && static_cast<std::size_t>(c.target) < eqs.size()) {
            const auto& e = eqs[static_cast<std::size_t>(c.target)];
            j["target_kind"] = std::string(to_string(e.kind));
            j["target_point"] = {e.p.x1, e.p.x2};
        }
        j["m"] = c.m;
        j["n"] = c.n;
        j["end"] = {c.end.x1, c.end.x2};
        j["time"] = c.time;
        j["min_saddle_distance"] = c.min_saddle_distance;
        j["near_saddle"] = c.near_saddle_flag;
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

// ============================================================================
// Cone condition
// ============================================================================

namespace {

struct ProductView {
    const ProductSnic* base = nullptr;
    double delta = 0.0;
};

ProductView product_view(const Field& f) {
    if (const auto* p = std::get_if<ProductSnic>(&f.spec())) return {p, 0.0};
    if (const auto* p = std::get_if<PerturbedProduct>(&f.spec())) return {&p->base, p->delta};
    throw PreconditionError("cone_condition_check: needs a product or perturbed product field");
}

/// Root of h(x) = target on (0, hi) for a profile increasing there.
double profile_level(const Profile& h, double target, double hi) {
    double lo = 0.0;
    if (!(h(hi) >= target)) throw PreconditionError("profile_level: level not attained");
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ConeReport cone_condition_check(const Field& field, const ConeOptions& opts) {
    const Field f(field.spec());
    const ProductView pv = product_view(f);
    const ProductSnic& b = *pv.base;
    const double mu1 = b.mu1;
    const double mu2 = b.mu2;
    const double delta = pv.delta;
    if (!(mu2 < 0.0)) throw PreconditionError("cone_condition_check: needs mu2 < 0");
    if (mu2 > -opts.C_star * delta || mu1 < mu2 + (opts.C_star - 2.0) * delta)
        throw PreconditionError("cone_condition_check: parameters outside the region mu2 <= -C delta, "
                                "mu1 >= mu2 + (C - 2) delta");
    if (opts.samples < 1 || !(opts.T > 0.0)) throw PreconditionError("cone_condition_check: bad options");

    const TorusGeometry& g = f.geometry();
    const double x2_hi = g.periodic ? 0.5 * g.L2 : 1e3;
    const double band = std::max(delta, 1e-3 * std::abs(mu2));
    const double x2c = profile_level(b.v2, -mu2, x2_hi);
    const double ann_lo = profile_level(b.v2, std::max(0.0, -mu2 - band), x2_hi);
    const double ann_hi = profile_level(b.v2, -mu2 + band, x2_hi);
    const double m = std::max(mu1, std::abs(mu2));
    const double s0 = std::sqrt(std::abs(mu2));

    ConeReport rep;
    rep.s0 = s0;
    rep.expected_rate = 2.0 * s0;
    rep.min_slack = inf;
    rep.min_rate = inf;
    const double slack_tol = 1e3 * opts.tol * std::max(1.0, s0);
    double rate_sum = 0.0;
    int rate_count = 0;
    bool ok = true;

    auto in_annulus = [&](Vec2 p) {
        const double y = g.periodic ? centered(p, g).x2 : p.x2;
        return y >= ann_lo - 1e-12 && y <= ann_hi + 1e-12;
    };

    for (int j = 0; j < opts.samples; ++j) {
        std::optional<Trajectory> path;
        for (int attempt = 0; attempt < 4 && !path; ++attempt) {
            const double frac = (j + 0.5 + 0.25 * attempt) / opts.samples;
            const double x1 = g.periodic ? -0.5 * g.L1 + frac * g.L1 : -1.0 + 2.0 * frac;
            Trajectory tr(0.0, {x1, x2c});
            bool inside = true;
            drive(f.reversed(), {x1, x2c}, opts.T, stepper_options(opts.tol), [&](const DenseSegment& seg) {
                tr.append(seg);
                inside = in_annulus(seg.end()) && in_annulus(seg.at(seg.t0 + 0.5 * seg.h));
                return inside;
            });
            if (inside)
                path = std::move(tr);
            else
                ++rep.resampled;
        }
        if (!path) continue;
        ++rep.samples;

        for (double sign : {1.0, -1.0}) {
            // State (s, integral of the vertical expansion rate) in forward time t = T - tau.
            auto X = [&](double t) { return path->at(opts.T - t); };
            auto rate = [&](double t, double s) {
                const Vec2 p = X(t);
                const Mat2 J = f.jacobian(p);
                const double vbar = m + b.v1(p.x1);
                return J.a22 + J.a21 * vbar / s;
            };
            auto rhs = [&](double t, Vec2 y) {
                const Vec2 p = X(t);
                const Mat2 J = f.jacobian(p);
                const Vec2 v = f(p);
                const double vbar = m + b.v1(p.x1);
                const double dvbar = b.v1.slope(p.x1);
                const double s = y.x1;
                const double sdot = J.a21 * vbar + (J.a22 - J.a11 + dvbar * v.x1 / vbar) * s - (J.a12 / vbar) * s * s;
                return Vec2{sdot, J.a22 + J.a21 * vbar / s};
            };
            double t = 0.0;
            Vec2 y{sign * s0, 0.0};
            double acc = 0.0;
            while (t < opts.T) {
                Dopri5<decltype(rhs)> st(rhs, t, y, stepper_options(opts.tol));
                bool restart = false;
                while (st.t() < opts.T) {
                    const DenseSegment& seg = st.step(opts.T);
                    for (int k = 1; k <= 4; ++k) {
                        const double tk = seg.t0 + seg.h * k / 4.0;
                        const double s = seg.at(tk).x1;
                        rep.min_slack = std::min(rep.min_slack, sign * s - s0);
                        rep.min_rate = std::min(rep.min_rate, rate(tk, s));
                    }
                    if (std::abs(st.y().x1) > 100.0 * s0) {
                        restart = true;
                        break;
                    }
                }
                acc += st.y().x2;
                t = st.t();
                y = {sign * s0, 0.0};
                if (!restart) break;
            }
            rate_sum += acc / opts.T;
            ++rate_count;
        }
    }
    if (rep.samples == 0) throw ConvergenceError("cone_condition_check: every sample left the annulus");
    rep.expansion_rate = rate_sum / rate_count;
    rep.invariant = ok && rep.min_slack >= -slack_tol;
    return rep;
}

// ============================================================================
// Vertical circles
// ============================================================================

double tanh_local_model_error(double mu1, double delta2, double x2_inf, double T, double tol) {
    if (!(mu1 < 0.0)) throw PreconditionError("tanh_local_model_error: needs mu1 < 0");
    const double a = std::sqrt(-mu1);
    auto rhs = [=](Vec2 p) { return Vec2{mu1 + p.x1 * p.x1, delta2 * (p.x1 + a)}; };
    const Vec2 p0{0.0, x2_inf - delta2 * std::log(2.0)};
    Dopri5<decltype(rhs)> st(rhs, 0.0, p0, stepper_options(tol));
    double err = 0.0;
    while (st.t() < T) {
        const DenseSegment& seg = st.step(T);
        for (int k = 1; k <= 4; ++k) {
            const double t = seg.t0 + seg.h * k / 4.0;
            const Vec2 p = seg.at(t);
            const double x1 = -a * std::tanh(a * t);
            const double x2 = x2_inf - delta2 * std::log1p(std::exp(-2.0 * a * t));
            err = std::max({err, std::abs(p.x1 - x1), std::abs(p.x2 - x2)});
        }
    }
    return err;
}

VerticalCirclesReport verify_vertical_circles(const Field& f, double mu1, double delta,
                                              const VerticalCirclesOptions& opts) {
    const TorusGeometry& g = f.geometry();
    if (!g.periodic) throw PreconditionError("verify_vertical_circles: needs a periodic field");
    if (!(mu1 < 0.0)) throw PreconditionError("verify_vertical_circles: needs mu1 < 0");
    // Strip bounds are stated in normalized coordinates; the explicit family uses X = 2x.
    const double scale = std::holds_alternative<ExplicitFamily>(f.spec()) ? 2.0 : 1.0;
    const double eta = opts.eta > 0.0 ? opts.eta : 0.5 * std::cbrt(delta);
    const double eps = opts.epsilon > 0.0 ? opts.epsilon : 0.1 * delta * eta;
    const double slack = delta * eta + eps;
    if (!(std::abs(mu1) > slack)) throw PreconditionError("verify_vertical_circles: |mu1| <= delta eta + eps");

    VerticalCirclesReport rep;
    rep.strip = {scale * std::sqrt(std::abs(mu1) - slack), scale * std::sqrt(std::abs(mu1) + slack)};
    const double H = scale * eta;

    const auto eqs = find_equilibria(f);
    if (eqs.size() == 4) {
        rep.inside_cusp = true;
    } else if (eqs.size() != 2) {
        throw PreconditionError("verify_vertical_circles: expected 2 or 4 equilibria, found " +
                                std::to_string(eqs.size()));
    }
    const auto set = label_branches(f, eqs);
    if (!set) throw PreconditionError("verify_vertical_circles: no saddle");

    TraceOptions topts = opts.trace;
    topts.keep_trajectory = true;
    const ConnectionResult d = trace_branch(f, set->D, eqs, topts);
    rep.c_minus = d.kind == ConnectionKind::sink_translate && d.m == 0 && d.n == 1;

    rep.strip_ok = true;
    std::ostringstream detail;
    for (const auto& seg : d.trajectory.segments()) {
        for (int k = 0; k < 4 && rep.strip_ok; ++k) {
            const Vec2 p = seg.at(seg.t0 + seg.h * k / 4.0);
            const Vec2 c = centered(p, g);
            if (std::abs(c.x2) > H) continue;
            const double w = -c.x1;
            if (w < rep.strip.x1 || w > rep.strip.x2) {
                rep.strip_ok = false;
                detail << "D leaves the strip at (" << p.x1 << ", " << p.x2 << "); ";
            }
        }
        if (!rep.strip_ok) break;
    }
    if (!rep.c_minus) detail << "D ends " << to_string(d.kind) << " (" << d.m << ", " << d.n << "); ";

    if (rep.inside_cusp) {
        const ConnectionResult a = trace_branch(f, set->A, eqs, opts.trace);
        rep.c_plus = a.kind == ConnectionKind::source_translate && a.m == 0 && a.n == -1;
        if (!rep.c_plus) detail << "A ends " << to_string(a.kind) << " (" << a.m << ", " << a.n << "); ";
        rep.interval_maps_inside = rep.c_plus;
    } else {
        const Field back = f.reversed();
        const double tol = opts.trace.tol;
        auto R = [&](double x1) -> std::optional<double> {
            const SectionResult s =
                integrate_to_section(back, {x1, H}, LinearSection::x2_equals(H - g.L2, -1), tol, opts.trace.T_budget);
            if (!s.crossed()) return std::nullopt;
            return s.point.x1;
        };
        // J runs from the crossing of D with x2 = eta to 2 sqrt|mu1|; D itself returns to the saddle.
        const ConnectionResult dc = trace_to_section(f, set->D, LinearSection::x2_equals(H, 1), eqs, opts.trace);
        if (dc.kind != ConnectionKind::section_exit) {
            detail << "D does not reach x2 = eta; ";
            rep.detail = detail.str();
            return rep;
        }
        const double hi = 2.0 * scale * std::sqrt(std::abs(mu1));
        const double lo = centered(dc.end, g).x1;
        rep.interval_maps_inside = lo < hi;
        for (double u : {lo + 1e-3 * (hi - lo), 0.5 * (lo + hi), hi}) {
            const auto r = R(u);
            if (!r || *r <= lo || *r >= hi) {
                rep.interval_maps_inside = false;
                detail << "backward return of x1=" << u << " leaves J; ";
            }
        }
        if (rep.interval_maps_inside) {
            double u = hi;
            for (int it = 0; it < 500; ++it) {
                const auto r = R(u);
                if (!r) break;
                rep.periodic_residual = std::abs(*r - u);
                u = *r;
                if (rep.periodic_residual < 1e-10) break;
            }
            rep.c_plus = rep.periodic_residual < 1e-8;
            if (rep.c_plus) rep.periodic_point = Vec2{u, H};
        }
    }
    rep.detail = detail.str();
    return rep;
}

}  // namespace snic
