#include "snictorus/equilibria.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "snictorus/errors.hpp"
#include "snictorus/parallel.hpp"

namespace snic {

namespace {

Vec2 unit(Vec2 v) {
    const double n = norm(v);
    return n > 0.0 ? (1.0 / n) * v : v;
}

Vec2 eigenvector(const Mat2& m, double lambda, Vec2 fallback) {
    const Vec2 a{m.a12, lambda - m.a11};
    const Vec2 b{lambda - m.a22, m.a21};
    const double na = norm(a);
    const double nb = norm(b);
    const double scale = std::max(1.0, m.frobenius());
    if (std::max(na, nb) <= 1e-14 * scale) return fallback;
    return unit(na >= nb ? a : b);
}

double slope_of(Vec2 v) {
    if (v.x1 == 0.0) return v.x2 >= 0.0 ? INFINITY : -INFINITY;
    return v.x2 / v.x1;
}

/// Real roots of the reduced-box quartic x1^4 + 2 mu1 x1^2 + d1^2 d2 x1 + mu1^2 + d1^2 mu2 = 0,
/// mapped back to (x1, x2). Clusters of nearly coincident roots are replaced by their mean,
/// which stays accurate at multiple roots where the individual roots do not.
std::vector<Vec2> reduced_box_candidates(const ReducedBox& r) {
    std::vector<Vec2> out;
    if (r.delta1 == 0.0) {
        if (r.mu1 > 0.0) return out;
        const double a = std::sqrt(-r.mu1);
        for (double x1 : {a, -a}) {
            const double q = -r.mu2 - r.delta2 * x1;
            if (q < 0.0) continue;
            const double b = std::sqrt(q);
            out.push_back({x1, b});
            out.push_back({x1, -b});
        }
        return out;
    }
    const double d1sq = r.delta1 * r.delta1;
    const std::array<double, 4> c{0.0, 2.0 * r.mu1, d1sq * r.delta2, r.mu1 * r.mu1 + d1sq * r.mu2};
    // Companion matrix of x^4 + c0 x^3 + c1 x^2 + c2 x + c3 with c0 = 0.
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    comp(0, 0) = -c[0];
    comp(0, 1) = -c[1];
    comp(0, 2) = -c[2];
    comp(0, 3) = -c[3];
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    std::vector<std::complex<double>> roots;
    for (int i = 0; i < 4; ++i) roots.push_back(es.eigenvalues()[i]);

    double scale = 1.0;
    for (auto z : roots) scale = std::max(scale, std::abs(z));
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        std::complex<double> sum = roots[i];
        int count = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (!used[j] && std::abs(roots[j] - roots[i]) < 1e-4 * scale) {
                sum += roots[j];
                ++count;
                used[j] = true;
            }
        }
        const std::complex<double> z = sum / static_cast<double>(count);
        if (std::abs(z.imag()) <= 1e-9 * scale) out.push_back({z.real(), -(r.mu1 + z.real() * z.real()) / r.delta1});
    }
    // Nearly real roots are also tried individually; Newton rejects spurious ones and the
    // caller's deduplication merges repeats.
    for (auto z : roots) {
        if (std::abs(z.imag()) <= 1e-3 * scale) out.push_back({z.real(), -(r.mu1 + z.real() * z.real()) / r.delta1});
    }
    return out;
}

}  // namespace

std::string_view to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::saddle: return "saddle";
        case EquilibriumKind::sink: return "sink";
        case EquilibriumKind::source: return "source";
        case EquilibriumKind::saddle_node: return "saddle-node";
        case EquilibriumKind::degenerate: return "degenerate";
    }
    return "degenerate";
}

double det_tolerance(const Mat2& jac) {
    const double n = jac.frobenius();
    return 1e-8 * std::max(1.0, n * n);
}

Equilibrium classify_jacobian(Vec2 p, const Mat2& jac) {
    Equilibrium e;
    e.p = p;
    e.jac = jac;
    e.det = jac.det();
    e.tr = jac.trace();

    const double tol_det = det_tolerance(jac);
    const double tol_tr = 1e-8 * std::max(1.0, jac.frobenius());
    if (std::abs(e.det) <= tol_det) {
        e.kind = std::abs(e.tr) > tol_tr ? EquilibriumKind::saddle_node : EquilibriumKind::degenerate;
    } else if (e.det < 0.0) {
        e.kind = EquilibriumKind::saddle;
    } else if (e.tr < 0.0) {
        e.kind = EquilibriumKind::sink;
    } else if (e.tr > 0.0) {
        e.kind = EquilibriumKind::source;
    } else {
        e.kind = EquilibriumKind::degenerate;
    }

    const double half = 0.5 * e.tr;
    const double disc = half * half - e.det;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        const double l1 = half + r;
        const double l2 = half - r;
        e.eigenvalues = {std::complex<double>(l1, 0.0), std::complex<double>(l2, 0.0)};
        Vec2 v1 = eigenvector(jac, l1, {1.0, 0.0});
        Vec2 v2 = eigenvector(jac, l2, {0.0, 1.0});
        if (r == 0.0 && std::abs(dot(v1, v2)) > 1.0 - 1e-12) v2 = {-v1.x2, v1.x1};
        e.eigenvectors = std::array<Vec2, 2>{v1, v2};
        e.slopes = std::array<double, 2>{slope_of(v1), slope_of(v2)};
    } else {
        const double im = std::sqrt(-disc);
        e.eigenvalues = {std::complex<double>(half, im), std::complex<double>(half, -im)};
    }
    return e;
}

Equilibrium classify_at(const Field& f, Vec2 p) {
    Equilibrium e = classify_jacobian(p, f.jacobian(p));
    e.residual = norm(f(p));
    return e;
}

Region default_region(const Field& f) {
    const auto& g = f.geometry();
    if (g.periodic) return Region::fundamental(g);
    return Region::box(10.0);
}

std::optional<Vec2> newton_equilibrium(const Field& f, Vec2 guess, double tol_root, int max_iter) {
    Vec2 p = guess;
    Vec2 v = f(p);
    double r = norm(v);
    for (int it = 0; it < max_iter && r > tol_root; ++it) {
        const Mat2 j = f.jacobian(p);
        const double det = j.det();
        if (!std::isfinite(det) || std::abs(det) < 1e-300) return std::nullopt;
        const Vec2 step{(j.a22 * v.x1 - j.a12 * v.x2) / det, (-j.a21 * v.x1 + j.a11 * v.x2) / det};
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-6) {
            const Vec2 q = p - alpha * step;
            const Vec2 vq = f(q);
            const double rq = norm(vq);
            if (std::isfinite(rq) && rq < r) {
                p = q;
                v = vq;
                r = rq;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    if (!(r <= tol_root)) return std::nullopt;
    // A few polishing steps past the tolerance, kept only while the residual drops.
    for (int it = 0; it < 3 && r > 0.0; ++it) {
        const Mat2 j = f.jacobian(p);
        const double det = j.det();
        if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
        const Vec2 q = p - Vec2{(j.a22 * v.x1 - j.a12 * v.x2) / det, (-j.a21 * v.x1 + j.a11 * v.x2) / det};
        const Vec2 vq = f(q);
        if (!(norm(vq) < r)) break;
        p = q;
        v = vq;
        r = norm(vq);
    }
    return p;
}

std::vector<Equilibrium> find_equilibria(const Field& f, const Region& region, const EquilibriumSearch& opts) {
    if (opts.seeds_per_axis < 8) throw PreconditionError("find_equilibria: seeds_per_axis must be at least 8");
    if (!(opts.tol_root > 0.0)) throw PreconditionError("find_equilibria: tol_root must be positive");
    const auto& geom = f.geometry();

    std::vector<Vec2> seeds;
    if (const auto* rb = std::get_if<ReducedBox>(&f.spec())) {
        seeds = reduced_box_candidates(*rb);
    } else {
        const int n = opts.seeds_per_axis;
        const Vec2 span = region.hi - region.lo;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                seeds.push_back(region.lo + Vec2{span.x1 * (i + 0.5) / n, span.x2 * (j + 0.5) / n});
    }

    const double merge = std::max(10.0 * opts.tol_root, 1e-7);
    std::vector<Equilibrium> found;
    for (const Vec2 s : seeds) {
        auto root = newton_equilibrium(f, s, opts.tol_root, opts.max_newton);
        if (!root) continue;
        Vec2 p = geom.wrap(*root);
        if (geom.periodic) {
            // Keep the translate inside the requested rectangle when one exists.
            for (int a = -1; a <= 1 && !region.contains(p); ++a)
                for (int b = -1; b <= 1 && !region.contains(p); ++b) {
                    const Vec2 q = geom.wrap(*root) + Vec2{a * geom.L1, b * geom.L2};
                    if (region.contains(q)) p = q;
                }
        }
        if (!region.contains(p)) continue;
        // Roots of a degenerate equilibrium converge slowly and scatter; two converged points
        // are one root when the field also vanishes (to tol_root) midway between them.
        const bool dup = std::any_of(found.begin(), found.end(), [&](const Equilibrium& e) {
            const Vec2 d = geom.torus_delta(e.p, p);
            const double dist = norm(d);
            if (dist < merge) return true;
            return dist < 1e-3 && norm(f(e.p + 0.5 * d)) <= 10.0 * opts.tol_root;
        });
        if (!dup) found.push_back(classify_at(f, p));
    }
    std::sort(found.begin(), found.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return a.p.x1 != b.p.x1 ? a.p.x1 < b.p.x1 : a.p.x2 < b.p.x2;
    });
    return found;
}

std::vector<Equilibrium> find_equilibria(const Field& f, const EquilibriumSearch& opts) {
    return find_equilibria(f, default_region(f), opts);
}

EigenData eigen_data(const Equilibrium& eq, double delta1, double delta2) {
    EigenData out;
    const double x1 = eq.p.x1;
    const double x2 = eq.p.x2;
    const double r2 = (x2 - x1) * (x2 - x1) + delta1 * delta2;
    if (delta1 == 0.0 || r2 < 0.0) {
        out.values = eq.eigenvalues;
        out.vectors = eq.eigenvectors;
        out.slopes = eq.slopes;
        if (r2 < 0.0 && delta1 != 0.0) {
            const double im = std::sqrt(-r2);
            out.values = {std::complex<double>(x1 + x2, im), std::complex<double>(x1 + x2, -im)};
            out.vectors.reset();
            out.slopes.reset();
        }
        return out;
    }
    const double r = std::sqrt(r2);
    out.values = {std::complex<double>(x1 + x2 + r, 0.0), std::complex<double>(x1 + x2 - r, 0.0)};
    const double sp = (x2 - x1 + r) / delta1;
    const double sm = (x2 - x1 - r) / delta1;
    out.slopes = std::array<double, 2>{sp, sm};
    out.vectors = std::array<Vec2, 2>{unit({1.0, sp}), unit({1.0, sm})};
    return out;
}

std::optional<double> x2_nullcline(const Field& f, double x1, double x2_guess, double tol) {
    double x2 = x2_guess;
    for (int it = 0; it < 80; ++it) {
        const double v = f({x1, x2}).x2;
        if (std::abs(v) <= tol) return x2;
        const double d = f.jacobian({x1, x2}).a22;
        if (d == 0.0 || !std::isfinite(d)) return std::nullopt;
        x2 -= v / d;
    }
    if (std::abs(f({x1, x2}).x2) <= 10.0 * tol) return x2;
    return std::nullopt;
}

CountRaster equilibrium_count_map(const Family& family, const ParameterGrid& grid, const EquilibriumSearch& opts,
                                  unsigned threads) {
    if (grid.nx < 2 || grid.ny < 2) throw PreconditionError("equilibrium_count_map: resolution must be at least 2");
    CountRaster out{grid, std::vector<int>(grid.cells(), -1)};
    parallel_for(grid.cells(), threads == 0 ? default_threads() : threads, [&](std::size_t k) {
        const int i = static_cast<int>(k % grid.nx);
        const int j = static_cast<int>(k / grid.nx);
        try {
            const Field f = family.at(grid.mu1(i), grid.mu2(j));
            const int n = static_cast<int>(find_equilibria(f, opts).size());
            out.counts[k] = (f.geometry().periodic && n % 2 != 0) ? -1 : n;
        } catch (const std::exception&) {
            out.counts[k] = -1;
        }
    });
    return out;
}

void write_equilibria_json(std::ostream& out, const std::vector<Equilibrium>& eqs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : eqs) {
        nlohmann::json j;
        j["x1"] = e.p.x1;
        j["x2"] = e.p.x2;
        j["det"] = e.det;
        j["tr"] = e.tr;
        j["kind"] = std::string(to_string(e.kind));
        j["eigenvalues"] = {{e.eigenvalues[0].real(), e.eigenvalues[0].imag()},
                            {e.eigenvalues[1].real(), e.eigenvalues[1].imag()}};
        if (e.slopes)
            j["slopes"] = {(*e.slopes)[0], (*e.slopes)[1]};
        else
            j["slopes"] = nullptr;
        arr.push_back(j);
    }
    out << arr.dump(2) << '\n';
}

}  // namespace snic
