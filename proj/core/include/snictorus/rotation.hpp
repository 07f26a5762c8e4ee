#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snictorus/equilibria.hpp"
#include "snictorus/integrate.hpp"

namespace snic {

// ============================================================================
// Homology direction
// ============================================================================

struct HomologyDirection {
    Vec2 h;                ///< unit vector, or zero when the orbit stays bounded
    bool zero = true;
    double confidence = 0.0;  ///< radius of the direction estimate
    Vec2 revolutions;         ///< V(T) = ((x1(T)-x1(0))/L1, (x2(T)-x2(0))/L2)
    double time = 0.0;        ///< integration time actually used

    double angle() const { return std::atan2(h.x2, h.x1); }
};

/// Revolution-count direction of the orbit of p0. The zero flag is set when
/// |V(T_max)| < 2 or when V changes by less than one revolution over [T_max/2, T_max];
/// an orbit captured by an equilibrium stops early.
HomologyDirection homology_direction(const Field& f, Vec2 p0, double T_max = 1e4, double tol = 1e-9);

// ============================================================================
// Cross sections and return maps
// ============================================================================

enum class SectionKind { diagonal, x1_const, x2_const };

std::string_view to_string(SectionKind k);

/// Section n . x = level crossed in the direction sign. A global section has
/// sign * (n . v) > 0 on the whole torus; otherwise only along the circle itself.
struct CrossSection {
    SectionKind kind = SectionKind::diagonal;
    int sign = 1;
    double margin = 0.0;  ///< certified lower bound of sign * (n . v) where it applies
    double level = 0.0;
    bool global = true;

    Vec2 normal(const TorusGeometry& g) const;
};

/// First section (diagonal, then x1, then x2) whose transversality survives a Lipschitz
/// margin on a grid x grid sample of the torus. Planar fields have none.
std::optional<CrossSection> find_global_cross_section(const Field& f, int grid = 128);
bool has_global_cross_section(const Field& f, int grid = 128);

/// Closed transversal x1 = c or x2 = c with the largest certified margin along the circle.
std::optional<CrossSection> find_transversal_circle(const Field& f, int grid = 128);

/// Lift of the first-return map of a global cross-section, in the section coordinate u
/// (x2 on x1-sections, x1 otherwise). R(u + P) = R(u) + P with P the section period.
class ReturnMap {
public:
    ReturnMap(Field f, CrossSection s, double tol = 1e-10);

    double period() const { return period_; }
    Vec2 point(double u) const;
    /// Image after n returns. Throws ConvergenceError when the orbit does not return.
    double iterate(double u, int n) const;
    /// Orbit u_0..u_n of successive returns (one integration).
    std::vector<double> orbit(double u, int n) const;
    /// Revolution counts accumulated by n returns that shift u by du.
    Vec2 revolutions(int n, double du) const;
    /// Integral of div v over the orbit segment of n returns from u.
    double divergence_integral(double u, int n) const;
    const CrossSection& section() const { return section_; }
    const Field& field() const { return field_; }

private:
    Field field_;
    CrossSection section_;
    double tol_;
    double period_;
    double budget_;
};

struct RotationEstimate {
    double rho = 0.0;         ///< mean shift per return in units of the section period
    double confidence = 1.0;  ///< |rho_N - rho| bound (1/N for circle maps)
    int returns = 0;
};

RotationEstimate rotation_number(const ReturnMap& map, double u0 = 0.0, int returns = 256);

/// Coprime (p, q) normalized so the first nonzero entry is positive.
struct Homotopy {
    int p = 0;
    int q = 0;
    friend bool operator==(Homotopy, Homotopy) = default;
};
Homotopy normalize_homotopy(long long p, long long q);

struct PeriodicOrbit {
    Vec2 point;        ///< a point of the orbit on the cover
    int returns = 0;   ///< section crossings per period
    Homotopy type;
    double period = 0.0;
    double residual = 0.0;          ///< |R^n(u) - u - shift|
    double floquet_exponent = 0.0;  ///< integral of div v over one period
    double multiplier = 0.0;        ///< derivative of the n-th return map
    bool attracting() const { return floquet_exponent < 0.0; }
};

/// Periodic points of the return map with at most q_max returns whose rotation matches rho.
std::vector<PeriodicOrbit> find_periodic_orbits(const ReturnMap& map, const RotationEstimate& rho, int q_max = 12,
                                                int samples = 48, double tol = 1e-9);

/// Follows the orbit of p through the level crossings x_k = p_k + j L_k of the axis with more
/// revolutions until it closes up as a periodic orbit with the signed revolution counts
/// `winding`. Works without a global section (e.g. next to equilibria); nullopt if the
/// orbit is captured or the iteration does not converge.
std::optional<PeriodicOrbit> converge_periodic_orbit(const Field& f, Vec2 p, Homotopy winding, double tol = 1e-9,
                                                     int max_iter = 200);

/// Coprime signed (p, q) with |p|, |q| <= q_max pointing within tol_angle of v, preferring
/// the smallest max(|p|, |q|). The result keeps the orientation of v.
std::optional<Homotopy> rational_direction(Vec2 v, int q_max, double tol_angle);

// ============================================================================
// Regime classification
// ============================================================================

enum class RegimeKind { poincare, poincare_irrational, cherry, fully_mode_locked, unresolved };

std::string_view to_string(RegimeKind k);
/// Small-integer color code used in rasters: 0 unresolved, 1 FML, 2 Cherry, 3 Poincare (p,q),
/// 4 Poincare irrational.
int color_code(RegimeKind k);

struct RegimeEvidence {
    int equilibria = 0;
    bool cross_section = false;
    std::optional<HomologyDirection> direction;
    std::optional<double> rotation;
    int bounded_orbits = 0;
    int winding_orbits = 0;
    std::string note;
};

struct RegimeLabel {
    RegimeKind kind = RegimeKind::unresolved;
    Homotopy type;
    RegimeEvidence evidence;
};

struct RegimeOptions {
    double T_max = 1e4;
    int q_max = 12;
    double tol = 1e-9;
    int orbit_samples = 16;
    int returns = 256;
    std::uint64_t seed = 12345;
    EquilibriumSearch search{};
};

RegimeLabel classify_regime(const Field& f, const RegimeOptions& opts = {});

// ============================================================================
// Winding sweep along the anti-diagonal
// ============================================================================

struct WindingSample {
    double lambda = 0.0;
    Vec2 mu;
    double angle = 0.0;  ///< atan2 of the revolution-count direction
    double confidence = 0.0;
    RegimeLabel label;
};

/// mu1 = K/2 - lambda, mu2 = K/2 + lambda over n samples of [lambda_lo, lambda_hi].
/// Locked samples report the exact angle of their verified periodic orbit.
std::vector<WindingSample> winding_sweep(const Family& family, double K, double lambda_lo, double lambda_hi, int n,
                                         const RegimeOptions& opts = {}, unsigned threads = 0);

}  // namespace snic
