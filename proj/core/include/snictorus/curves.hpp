#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "snictorus/field.hpp"

namespace snic {

// ============================================================================
// Closed forms for the reduced box
// ============================================================================

struct SneCurveSample {
    double theta{};
    int sigma = 1;
    Vec2 mu;
    Vec2 x;
};

struct CuspData {
    double theta_c{};
    Vec2 mu;
    Vec2 x;
};

/// Saddle-node curve point: x = (sigma/2) sqrt(d1 d2) (e^theta, e^-theta),
/// mu1 = -(d1 d2/4) e^{2 theta} - (sigma/2) d1 sqrt(d1 d2) e^{-theta}, mu2 symmetric.
/// sigma = +1 is the cusped curve, sigma = -1 the outer one.
SneCurveSample sne_analytic(double delta1, double delta2, int sigma, double theta);

/// theta_c = ln(d1/d2)/6, mu = -(3/4)(d1^{4/3} d2^{2/3}, d1^{2/3} d2^{4/3}), x = (1/2)(d1^{2/3} d2^{1/3}, d1^{1/3} d2^{2/3}).
CuspData cusp(double delta1, double delta2);

/// Real mu2 roots of (mu1 - mu2)^2 + (d1 + d2)(d2 mu1 + d1 mu2) = 0, ascending.
std::vector<double> neutral_saddle_curve(double delta1, double delta2, double mu1);

/// Saddle (eps = +1) or sink (eps = -1) coexisting with the saddle-node at theta on the cusped curve.
Vec2 coexisting_equilibria(double delta1, double delta2, double theta, int eps);

std::vector<SneCurveSample> sample_sne(double delta1, double delta2, int sigma, double theta_lo, double theta_hi,
                                       int n);

// ============================================================================
// Pseudo-arclength continuation of (v = 0, det Dv = 0)
// ============================================================================

using Vec4 = std::array<double, 4>;  ///< (x1, x2, mu1, mu2)

struct BranchPoint {
    double s{};  ///< arclength from the seed
    Vec2 mu;
    Vec2 x;
    Vec4 tangent{};  ///< unit tangent in (x1, x2, mu1, mu2)
    double residual{};

    Vec2 dmu() const { return {tangent[2], tangent[3]}; }
};

struct StepStats {
    int accepted = 0;
    int halvings = 0;
    int newton_iterations = 0;
    double min_step = 0.0;
    double max_step = 0.0;
};

struct CurveBranch {
    std::vector<BranchPoint> points;
    StepStats stats;
    bool left_bound = false;  ///< stopped because |mu| exceeded the bound
};

struct SneSeed {
    Vec2 x;
    Vec2 mu;
};

struct ContinuationOptions {
    double step = 0.0;        ///< 0: 1e-3 sqrt(|d1 d2|) (or 1e-3 when uncoupled)
    double step_max = 0.0;    ///< 0: 50 x step
    int n_steps = 5000;
    double bound_factor = 10.0;  ///< stop when max|mu_j| > bound_factor * delta
    double mu_bound = 0.0;       ///< explicit bound overriding bound_factor when > 0
    double tol = 1e-12;
    int max_halvings = 8;
    /// Orientation: the initial tangent t satisfies t . hint > 0.
    Vec4 hint{1.0, 0.0, 0.0, 0.0};
};

/// Residual of the extended system (v1, v2, det Dv) at z.
std::array<double, 3> sne_residual(const Family& family, const Vec4& z);

/// Minimum-norm Newton projection of a guess onto the extended system.
std::optional<SneSeed> refine_sne_seed(const Family& family, SneSeed guess, double tol = 1e-12);

/// Continues the saddle-node curve through the seed. Throws ConvergenceError after
/// max_halvings consecutive corrector failures.
CurveBranch continue_sne(const Family& family, SneSeed seed, const ContinuationOptions& opts = {});

/// Cusp of a continued branch: the point where the mu-projection of the tangent vanishes,
/// located by bisection in arclength between the two points where dmu1 changes sign.
std::optional<BranchPoint> locate_fold_cusp(const Family& family, const CurveBranch& branch, double tol = 1e-12);

void write_branch_csv(std::ostream& out, const CurveBranch& branch);
void write_samples_csv(std::ostream& out, const std::vector<SneCurveSample>& samples);

}  // namespace snic
