#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snictorus/equilibria.hpp"
#include "snictorus/integrate.hpp"

namespace snic {

// ============================================================================
// Saddle branches
// ============================================================================

enum class Stability { stable, unstable };

/// One branch of a saddle's local invariant manifold.
///
/// Labels: D unstable going up (+x2) at the saddle whose unstable direction is most vertical,
/// A stable arriving from below at the saddle whose stable direction is most vertical,
/// B unstable going right (+x1), C stable arriving from the left. The opposite branch at
/// the same saddle carries the lowercase letter; '?' marks an unlabeled branch.
struct SaddleBranch {
    Equilibrium saddle;  ///< position on the cover, translate included
    char label = '?';
    Stability stability = Stability::unstable;
    Vec2 direction;      ///< unit launch direction from the saddle
    double h = 1e-7;     ///< launch distance

    Vec2 launch_point() const { return saddle.p + h * direction; }
    /// The same branch at the saddle translate s_{mn}.
    SaddleBranch translated(int m, int n, const TorusGeometry& g) const;
};

/// The four branches of a saddle (unstable +, unstable -, stable +, stable -), unlabeled.
std::vector<SaddleBranch> saddle_branches(const Equilibrium& saddle, double h);

/// Default launch distance 1e-6 sqrt(|delta1 delta2|) from the field's linear coupling,
/// or 1e-7 when uncoupled.
double default_launch_offset(const Field& f);

struct BranchSet {
    SaddleBranch A, B, C, D;
    std::vector<SaddleBranch> all;  ///< every branch of every saddle, labeled where possible
};

/// Saddle positions are taken in the centered domain [-L/2, L/2). nullopt without saddles.
std::optional<BranchSet> label_branches(const Field& f, const std::vector<Equilibrium>& eqs, double h = 0.0);

/// Representative of p in [-L1/2, L1/2) x [-L2/2, L2/2); identity on the plane.
Vec2 centered(Vec2 p, const TorusGeometry& g);

// ============================================================================
// Tracing
// ============================================================================

enum class ConnectionKind { sink_translate, source_translate, section_exit, near_saddle, escaped, budget_exceeded };

std::string_view to_string(ConnectionKind k);

struct ConnectionResult {
    ConnectionKind kind = ConnectionKind::budget_exceeded;
    char branch = '?';
    int m = 0;  ///< translate indices of the target relative to its copy nearest the saddle
    int n = 0;
    int target = -1;  ///< index into the equilibrium list (nodes and near-saddle passes)
    Vec2 end;         ///< last point on the cover
    double time = 0.0;
    double min_saddle_distance = 0.0;  ///< closest approach to a saddle translate (own saddle after leaving 100 capture radii)
    bool near_saddle_flag = false;     ///< approach within 10 capture radii
    Trajectory trajectory;             ///< filled when requested

    bool captured() const {
        return kind == ConnectionKind::sink_translate || kind == ConnectionKind::source_translate;
    }
};

struct TraceOptions {
    double T_budget = 1e4;
    double capture_radius = 0.0;  ///< 0: 1e-4 min(L1, L2)
    double tol = 1e-10;
    double escape_radius = 1e3;   ///< planar fields only
    bool keep_trajectory = false;
};

/// Traces the branch (stable branches in reversed time) until it settles on a node translate,
/// passes within capture_radius of a saddle translate, or exhausts the budget.
ConnectionResult trace_branch(const Field& f, const SaddleBranch& b, const std::vector<Equilibrium>& eqs,
                              const TraceOptions& opts = {});
ConnectionResult trace_branch(const Field& f, const SaddleBranch& b, const TraceOptions& opts = {});

/// Traces the branch until it crosses the section; any earlier capture is returned as is.
ConnectionResult trace_to_section(const Field& f, const SaddleBranch& b, const LinearSection& section,
                                  const std::vector<Equilibrium>& eqs, const TraceOptions& opts = {});

// ============================================================================
// Section gaps and heteroclinic connections
// ============================================================================

enum class GapKind {
    D_A01,  ///< x1(A01) - x1(D) on x2 = L2 - eta; positive when D passes left
    B_C10,  ///< x2(C10) - x2(B) on x1 = L1 - eta; positive when B passes below
};

/// Signed gap between `first` (traced forward) and the translate of `second` (traced backward)
/// on the section. Throws BranchCrossingError naming the branch that fails to cross.
double branch_gap_at_section(const Field& f, const SaddleBranch& first, const SaddleBranch& second, GapKind kind,
                             double eta, const std::vector<Equilibrium>& eqs, const TraceOptions& opts = {});
double branch_gap_at_section(const Field& f, GapKind kind, double eta, const TraceOptions& opts = {});

/// mu(s) = origin + s * direction.
struct ParameterSlice {
    Vec2 origin;
    Vec2 direction;
    Vec2 at(double s) const { return origin + s * direction; }
};

struct HeteroclinicRoot {
    double s = 0.0;
    Vec2 mu;
    double gap = 0.0;
    int evaluations = 0;
};

/// Bisection on the sign of gap(s), finished by secant steps, until the bracket is below tol
/// or |gap| < gap_tol. Throws BracketError without a sign change.
HeteroclinicRoot find_heteroclinic(const std::function<double(double)>& gap, double s0, double s1, double tol = 1e-10,
                                   double gap_tol = 1e-12, int max_evaluations = 200);
HeteroclinicRoot find_heteroclinic(const Family& family, const ParameterSlice& slice, GapKind kind, double eta,
                                   double s0, double s1, double tol = 1e-10, const TraceOptions& opts = {});

// ============================================================================
// Basic tartan
// ============================================================================

enum class TartanReason {
    ok,
    not_periodic,
    wrong_equilibrium_count,
    wrong_equilibrium_kinds,
    branch_not_captured,
    pattern_mismatch,
};

std::string_view to_string(TartanReason r);

struct TartanReport {
    bool basic = false;
    TartanReason reason = TartanReason::wrong_equilibrium_count;
    std::vector<Equilibrium> equilibria;
    std::vector<ConnectionResult> connections;  ///< eight traces, saddle by saddle
    std::string detail;
};

/// True iff there are exactly a sink, a source and two saddles and the eight branches form two
/// vertical and two horizontal rotational circles: per saddle the unstable branches reach the
/// sink translates {0, e} and the stable ones come from source translates {0, e'} with e, e'
/// orthogonal unit axis vectors matching the launch sides, one saddle vertical, one horizontal.
TartanReport verify_basic_tartan(const Field& f, const TraceOptions& opts = {}, unsigned threads = 0);

/// JSON array with one object per traced branch.
void write_connections_json(std::ostream& out, const std::vector<ConnectionResult>& connections,
                            const std::vector<Equilibrium>& eqs);

// ============================================================================
// Cone condition on the annulus of the repelling horizontal circle
// ============================================================================

struct ConeOptions {
    double T = 100.0;
    int samples = 8;   ///< starting points spread over x1
    double C_star = 4.0;
    double tol = 1e-10;
};

struct ConeReport {
    bool invariant = false;     ///< min slack >= -tolerance on every sample
    double min_slack = 0.0;     ///< min over time of |s| - s0
    double expansion_rate = 0.0;  ///< mean of d log|dx2| / dt, averaged over samples
    double min_rate = 0.0;        ///< smallest instantaneous vertical expansion rate
    double expected_rate = 0.0;   ///< 2 sqrt(|mu2|)
    double s0 = 0.0;
    int samples = 0;
    int resampled = 0;
};

/// Integrates the slope Riccati equation
///   s' = d1v2 vbar + (d2v2 - d1v1 + vbar' v1 / vbar) s - (d2v1 / vbar) s^2
/// in the coordinate y1 = int dx1 / vbar along orbits on the annulus
/// sqrt(-mu2 - delta) <= x2 <= sqrt(-mu2 + delta), starting on both cone edges |s| = sqrt(|mu2|).
/// vbar = max(mu1, |mu2|) + h1(x1). Orbits on the annulus are obtained in backward time,
/// where it is invariant. Requires a product-based field in the stated parameter region.
ConeReport cone_condition_check(const Field& f, const ConeOptions& opts = {});

// ============================================================================
// Persistence of the vertical circles
// ============================================================================

struct VerticalCirclesOptions {
    double eta = 0.0;        ///< 0: delta^{1/3} / 2
    double epsilon = 0.0;    ///< strip slack; 0: delta * eta / 10
    TraceOptions trace{};
};

struct VerticalCirclesReport {
    bool inside_cusp = false;       ///< four equilibria (otherwise saddle and sink only)
    bool c_minus = false;           ///< D reaches the sink translate
    bool c_plus = false;            ///< A leaves the source translate, or the periodic orbit exists
    bool strip_ok = false;          ///< D stays in its strip up to |x2| = eta
    bool interval_maps_inside = false;  ///< backward return map takes J = (x1 of D, 2 sqrt|mu1|) on x2 = eta into itself
    std::optional<Vec2> periodic_point;  ///< C+ on x2 = eta, between the sne curves
    double periodic_residual = 0.0;
    Vec2 strip;                     ///< sqrt(|mu1| -+ (delta eta + eps))
    std::string detail;
};

/// Checks both vertical circles for mu1 < 0 between the outer and lower cusped sne curves.
VerticalCirclesReport verify_vertical_circles(const Field& f, double mu1, double delta,
                                              const VerticalCirclesOptions& opts = {});

/// Max deviation of the local model x1' = mu1 + x1^2, x2' = d2 (x1 + sqrt|mu1|) from
/// x1 = -sqrt|mu1| tanh(sqrt|mu1| t) and x2 = x2(inf) - d2 log(1 + exp(-2 sqrt|mu1| t)) over [0, T].
double tanh_local_model_error(double mu1, double delta2, double x2_inf, double T, double tol = 1e-12);

}  // namespace snic
