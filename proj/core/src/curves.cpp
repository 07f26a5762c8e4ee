#include "snictorus/curves.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "snictorus/errors.hpp"
#include "snictorus/io.hpp"

namespace snic {

namespace {

using Vec4d = Eigen::Vector4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

Vec4d to_eigen(const Vec4& z) { return {z[0], z[1], z[2], z[3]}; }
Vec4 from_eigen(const Vec4d& z) { return {z[0], z[1], z[2], z[3]}; }

Eigen::Vector3d residual_e(const Family& fam, const Vec4d& z) {
    const Field f = fam.at(z[2], z[3]);
    const Vec2 x{z[0], z[1]};
    const Vec2 v = f(x);
    return {v.x1, v.x2, f.jacobian(x).det()};
}

Mat34 extended_jacobian(const Family& fam, const Vec4d& z) {
    Mat34 j;
    if (fam.kind == FamilyKind::reduced_box) {
        const double s = fam.reversed ? -1.0 : 1.0;
        const double x1 = z[0];
        const double x2 = z[1];
        j << s * 2.0 * x1, s * fam.delta1, s, 0.0,
             s * fam.delta2, s * 2.0 * x2, 0.0, s,
             4.0 * x2, 4.0 * x1, 0.0, 0.0;
        return j;
    }
    for (int k = 0; k < 4; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[k]));
        Vec4d zp = z;
        Vec4d zm = z;
        zp[k] += h;
        zm[k] -= h;
        j.col(k) = (residual_e(fam, zp) - residual_e(fam, zm)) / (2.0 * h);
    }
    return j;
}

Vec4d oriented_tangent(const Mat34& dF, const Vec4d& prev) {
    Eigen::Matrix4d a;
    a.topRows<3>() = dF;
    a.row(3) = prev.transpose();
    Vec4d t = a.fullPivLu().solve(Eigen::Vector4d(0.0, 0.0, 0.0, 1.0));
    t.normalize();
    if (t.dot(prev) < 0.0) t = -t;
    return t;
}

Vec4d null_tangent(const Mat34& dF, const Vec4& hint) {
    Eigen::JacobiSVD<Mat34> svd(dF, Eigen::ComputeFullV);
    Vec4d t = svd.matrixV().col(3);
    if (t.dot(to_eigen(hint)) < 0.0) t = -t;
    return t;
}

struct Corrected {
    Vec4d z;
    int iterations;
};

/// Newton on (F(z) = 0, t.(z - anchor) = ds).
std::optional<Corrected> correct(const Family& fam, Vec4d z, const Vec4d& anchor, const Vec4d& t, double ds,
                                 double tol, double max_move) {
    for (int it = 1; it <= 12; ++it) {
        const Eigen::Vector3d F = residual_e(fam, z);
        Eigen::Matrix4d a;
        a.topRows<3>() = extended_jacobian(fam, z);
        a.row(3) = t.transpose();
        Eigen::Vector4d g;
        g.head<3>() = F;
        g[3] = t.dot(z - anchor) - ds;
        const Vec4d dz = a.fullPivLu().solve(g);
        if (!dz.allFinite()) return std::nullopt;
        z -= dz;
        if ((z - anchor).norm() > max_move) return std::nullopt;
        const double r = residual_e(fam, z).cwiseAbs().maxCoeff();
        if (r <= tol && dz.cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, z.cwiseAbs().maxCoeff())) {
            return Corrected{z, it};
        }
    }
    return std::nullopt;
}

BranchPoint make_point(const Family& fam, const Vec4d& z, const Vec4d& t, double s) {
    BranchPoint p;
    p.s = s;
    p.x = {z[0], z[1]};
    p.mu = {z[2], z[3]};
    p.tangent = from_eigen(t);
    p.residual = residual_e(fam, z).cwiseAbs().maxCoeff();
    return p;
}

}  // namespace

// ============================================================================
// Closed forms
// ============================================================================

SneCurveSample sne_analytic(double delta1, double delta2, int sigma, double theta) {
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw PreconditionError("sne_analytic: requires delta1, delta2 > 0");
    if (sigma != 1 && sigma != -1) throw PreconditionError("sne_analytic: sigma must be +1 or -1");
    const double p = delta1 * delta2;
    const double r = std::sqrt(p);
    const double s = static_cast<double>(sigma);
    SneCurveSample out;
    out.theta = theta;
    out.sigma = sigma;
    out.x = {0.5 * s * r * std::exp(theta), 0.5 * s * r * std::exp(-theta)};
    out.mu = {-0.25 * p * std::exp(2.0 * theta) - 0.5 * s * delta1 * r * std::exp(-theta),
              -0.25 * p * std::exp(-2.0 * theta) - 0.5 * s * delta2 * r * std::exp(theta)};
    return out;
}

CuspData cusp(double delta1, double delta2) {
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw PreconditionError("cusp: requires delta1, delta2 > 0");
    const double a = std::cbrt(delta1);
    const double b = std::cbrt(delta2);
    CuspData c;
    c.theta_c = std::log(delta1 / delta2) / 6.0;
    c.mu = {-0.75 * a * a * a * a * b * b, -0.75 * a * a * b * b * b * b};
    c.x = {0.5 * a * a * b, 0.5 * a * b * b};
    return c;
}

std::vector<double> neutral_saddle_curve(double delta1, double delta2, double mu1) {
    const double s = delta1 + delta2;
    const double b = s * delta1 - 2.0 * mu1;
    const double c = mu1 * mu1 + s * delta2 * mu1;
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) return {};
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    std::vector<double> roots;
    if (q != 0.0) {
        roots = {q, c / q};
    } else {
        roots = {0.0, -b};
    }
    std::sort(roots.begin(), roots.end());
    if (disc == 0.0) roots.resize(1);
    return roots;
}

Vec2 coexisting_equilibria(double delta1, double delta2, double theta, int eps) {
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw PreconditionError("coexisting_equilibria: requires delta > 0");
    if (eps != 1 && eps != -1) throw PreconditionError("coexisting_equilibria: eps must be +1 or -1");
    const double r = std::sqrt(delta1 * delta2);
    const double e = static_cast<double>(eps);
    return {-0.5 * r * std::exp(theta) + e * std::pow(delta1, 0.75) * std::pow(delta2, 0.25) * std::exp(-0.5 * theta),
            -0.5 * r * std::exp(-theta) + e * std::pow(delta1, 0.25) * std::pow(delta2, 0.75) * std::exp(0.5 * theta)};
}

std::vector<SneCurveSample> sample_sne(double delta1, double delta2, int sigma, double theta_lo, double theta_hi,
                                       int n) {
    std::vector<SneCurveSample> out;
    if (n < 2) n = 2;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back(sne_analytic(delta1, delta2, sigma, theta_lo + (theta_hi - theta_lo) * i / (n - 1)));
    return out;
}

// ============================================================================
// Continuation
// ============================================================================

std::array<double, 3> sne_residual(const Family& family, const Vec4& z) {
    const auto r = residual_e(family, to_eigen(z));
    return {r[0], r[1], r[2]};
}

std::optional<SneSeed> refine_sne_seed(const Family& family, SneSeed guess, double tol) {
    Vec4d z(guess.x.x1, guess.x.x2, guess.mu.x1, guess.mu.x2);
    for (int it = 0; it < 50; ++it) {
        const Eigen::Vector3d F = residual_e(family, z);
        if (F.cwiseAbs().maxCoeff() <= tol) return SneSeed{{z[0], z[1]}, {z[2], z[3]}};
        const Mat34 j = extended_jacobian(family, z);
        const Vec4d dz = j.completeOrthogonalDecomposition().solve(F);
        if (!dz.allFinite()) return std::nullopt;
        z -= dz;
    }
    if (residual_e(family, z).cwiseAbs().maxCoeff() <= 10.0 * tol) return SneSeed{{z[0], z[1]}, {z[2], z[3]}};
    return std::nullopt;
}

CurveBranch continue_sne(const Family& family, SneSeed seed, const ContinuationOptions& opts) {
    Vec4d z(seed.x.x1, seed.x.x2, seed.mu.x1, seed.mu.x2);
    if (residual_e(family, z).cwiseAbs().maxCoeff() > 1e-6)
        throw PreconditionError("continue_sne: seed does not satisfy the extended system to 1e-6");

    const double dd = std::sqrt(std::abs(family.delta1 * family.delta2));
    double h = opts.step > 0.0 ? opts.step : (dd > 0.0 ? 1e-3 * dd : 1e-3);
    const double h_max = opts.step_max > 0.0 ? opts.step_max : 50.0 * h;
    const double h_min = h / 256.0 / 1024.0;
    double bound = opts.mu_bound > 0.0 ? opts.mu_bound : opts.bound_factor * family.delta();
    if (!(bound > 0.0)) bound = 1.0;

    // Polish the seed so the branch starts on the curve to the corrector tolerance.
    if (auto r = refine_sne_seed(family, seed, opts.tol)) z = Vec4d(r->x.x1, r->x.x2, r->mu.x1, r->mu.x2);

    CurveBranch branch;
    Vec4d t = null_tangent(extended_jacobian(family, z), opts.hint);
    branch.points.push_back(make_point(family, z, t, 0.0));
    branch.stats.min_step = std::numeric_limits<double>::infinity();

    double s = 0.0;
    int halvings = 0;
    for (int step = 0; step < opts.n_steps; ++step) {
        const Vec4d pred = z + h * t;
        auto c = correct(family, pred, z, t, h, opts.tol, 2.0 * h + 1e-12);
        if (!c) {
            ++branch.stats.halvings;
            if (++halvings > opts.max_halvings || h * 0.5 < h_min)
                throw ConvergenceError("continue_sne: corrector failed after " + std::to_string(opts.max_halvings) +
                                       " step halvings at mu=(" + std::to_string(z[2]) + ", " +
                                       std::to_string(z[3]) + ")");
            h *= 0.5;
            --step;
            continue;
        }
        halvings = 0;
        const Vec4d znew = c->z;
        const Vec4d tnew = oriented_tangent(extended_jacobian(family, znew), t);
        s += (znew - z).norm();
        z = znew;
        t = tnew;
        branch.points.push_back(make_point(family, z, t, s));
        ++branch.stats.accepted;
        branch.stats.newton_iterations += c->iterations;
        branch.stats.min_step = std::min(branch.stats.min_step, h);
        branch.stats.max_step = std::max(branch.stats.max_step, h);
        if (std::max(std::abs(z[2]), std::abs(z[3])) > bound) {
            branch.left_bound = true;
            break;
        }
        if (c->iterations <= 2) h = std::min(2.0 * h, h_max);
        else if (c->iterations >= 5) h = std::max(0.5 * h, h_min);
    }
    if (branch.stats.accepted == 0) branch.stats.min_step = 0.0;
    return branch;
}

std::optional<BranchPoint> locate_fold_cusp(const Family& family, const CurveBranch& branch, double tol) {
    const auto& pts = branch.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const BranchPoint& a = pts[i];
        const BranchPoint& b = pts[i + 1];
        if (!(a.tangent[2] * b.tangent[2] < 0.0)) continue;

        const Vec4d za(a.x.x1, a.x.x2, a.mu.x1, a.mu.x2);
        const Vec4d ta = to_eigen(a.tangent);
        const Vec4d zb(b.x.x1, b.x.x2, b.mu.x1, b.mu.x2);
        double lo = 0.0;
        double hi = ta.dot(zb - za);
        const double span = hi;
        double sign_lo = a.tangent[2];
        std::optional<BranchPoint> best;
        for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, span); ++it) {
            const double mid = 0.5 * (lo + hi);
            auto c = correct(family, za + mid * ta, za, ta, mid, tol, 4.0 * span + 1e-12);
            if (!c) break;
            const Vec4d tm = oriented_tangent(extended_jacobian(family, c->z), ta);
            best = make_point(family, c->z, tm, a.s + mid);
            if (tm[2] * sign_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // A genuine cusp has both mu-components of the tangent vanishing together.
        if (best && std::abs(best->tangent[3]) < 1e-4) return best;
        (void)sign_lo;
    }
    return std::nullopt;
}

void write_branch_csv(std::ostream& out, const CurveBranch& branch) {
    CsvWriter w(out);
    w.header({"arclength", "mu1", "mu2", "x1", "x2"});
    for (const auto& p : branch.points) {
        w.cell(p.s).cell(p.mu.x1).cell(p.mu.x2).cell(p.x.x1).cell(p.x.x2);
        w.end_row();
    }
}

void write_samples_csv(std::ostream& out, const std::vector<SneCurveSample>& samples) {
    CsvWriter w(out);
    w.header({"theta", "sigma", "mu1", "mu2", "x1", "x2"});
    for (const auto& p : samples) {
        w.cell(p.theta).cell(p.sigma).cell(p.mu.x1).cell(p.mu.x2).cell(p.x.x1).cell(p.x.x2);
        w.end_row();
    }
}

}  // namespace snic
