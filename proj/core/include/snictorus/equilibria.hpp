#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snictorus/field.hpp"

namespace snic {

enum class EquilibriumKind { saddle, sink, source, saddle_node, degenerate };

std::string_view to_string(EquilibriumKind k);

struct Equilibrium {
    Vec2 p;
    Mat2 jac;
    double det{};
    double tr{};
    EquilibriumKind kind = EquilibriumKind::degenerate;
    /// Ordered by decreasing real part.
    std::array<std::complex<double>, 2> eigenvalues{};
    /// Unit eigenvectors matching the eigenvalues; absent for complex pairs.
    std::optional<std::array<Vec2, 2>> eigenvectors;
    /// dx2/dx1 of the eigenvectors (may be infinite); absent for complex pairs.
    std::optional<std::array<double, 2>> slopes;
    double residual{};

    bool is_node() const { return kind == EquilibriumKind::sink || kind == EquilibriumKind::source; }
};

/// |det| at or below this band counts as singular.
double det_tolerance(const Mat2& jac);

/// Classifies an equilibrium at p from its Jacobian.
Equilibrium classify_at(const Field& f, Vec2 p);
/// Classification from a Jacobian alone.
Equilibrium classify_jacobian(Vec2 p, const Mat2& jac);

/// Axis-aligned rectangle of the fundamental domain (or of the plane).
struct Region {
    Vec2 lo;
    Vec2 hi;

    static Region fundamental(const TorusGeometry& g) { return {{0.0, 0.0}, {g.L1, g.L2}}; }
    static Region box(double half_width) { return {{-half_width, -half_width}, {half_width, half_width}}; }
    bool contains(Vec2 p) const { return p.x1 >= lo.x1 && p.x1 <= hi.x1 && p.x2 >= lo.x2 && p.x2 <= hi.x2; }
};

/// Default search region: the fundamental domain, or the box |x_j| <= 2 for planar fields.
Region default_region(const Field& f);

struct EquilibriumSearch {
    int seeds_per_axis = 16;
    double tol_root = 1e-12;
    int max_newton = 60;
};

/// All equilibria in the region: damped Newton from a seed grid, deduplicated in torus
/// distance. Reduced-box fields are also seeded from the real roots of their quartic.
std::vector<Equilibrium> find_equilibria(const Field& f, const Region& region, const EquilibriumSearch& opts = {});
std::vector<Equilibrium> find_equilibria(const Field& f, const EquilibriumSearch& opts = {});

/// Newton polish of a single equilibrium guess; nullopt when it does not converge.
std::optional<Vec2> newton_equilibrium(const Field& f, Vec2 guess, double tol_root = 1e-12, int max_iter = 60);

struct EigenData {
    std::array<std::complex<double>, 2> values{};
    std::optional<std::array<double, 2>> slopes;
    std::optional<std::array<Vec2, 2>> vectors;
};

/// Eigenvalues x1 + x2 +- R and slopes (x2 - x1 +- R)/delta1 with R = sqrt((x2 - x1)^2 + delta1 delta2),
/// ordered (+, -). With delta1 = 0 the slopes come from the numeric eigenvectors.
EigenData eigen_data(const Equilibrium& eq, double delta1, double delta2);

/// JSON array of {x1, x2, det, tr, kind, eigenvalues, slopes}; complex eigenvalues as [re, im],
/// slopes null for complex pairs.
void write_equilibria_json(std::ostream& out, const std::vector<Equilibrium>& eqs);

/// <a, b> = a1 b1 / delta1 + a2 b2 / delta2.
inline double weighted_inner(Vec2 a, Vec2 b, double delta1, double delta2) {
    return a.x1 * b.x1 / delta1 + a.x2 * b.x2 / delta2;
}

/// Root x2 of v2(x1, x2) = 0 near x2_guess.
std::optional<double> x2_nullcline(const Field& f, double x1, double x2_guess, double tol = 1e-13);

struct ParameterGrid {
    double mu1_lo{}, mu1_hi{}, mu2_lo{}, mu2_hi{};
    int nx = 2;
    int ny = 2;

    double mu1(int i) const { return nx == 1 ? mu1_lo : mu1_lo + (mu1_hi - mu1_lo) * i / (nx - 1); }
    double mu2(int j) const { return ny == 1 ? mu2_lo : mu2_lo + (mu2_hi - mu2_lo) * j / (ny - 1); }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

/// Equilibrium counts on a parameter grid, row-major with mu2 outer. -1 marks a cell whose
/// Newton search failed or returned an odd count on a torus.
struct CountRaster {
    ParameterGrid grid;
    std::vector<int> counts;

    int at(int i, int j) const { return counts[static_cast<std::size_t>(j) * grid.nx + i]; }
};

CountRaster equilibrium_count_map(const Family& family, const ParameterGrid& grid,
                                  const EquilibriumSearch& opts = {}, unsigned threads = 0);

}  // namespace snic
