#pragma once

#include <functional>
#include <string>
#include <type_traits>
#include <variant>

#include "snictorus/geometry.hpp"

namespace snic {

// ============================================================================
// Scalar profiles v(x) - mu = x^2 + O(x^3)
// ============================================================================

/// One-dimensional SNIC profile h with v(x) = mu + h(x), h(x) = x^2 + O(x^3).
class Profile {
public:
    using Fn = std::function<double(double)>;

    Profile(Fn value, Fn slope, std::string name = "custom")
        : value_(std::move(value)), slope_(std::move(slope)), name_(std::move(name)) {}

    /// h(x) = x^2 on the plane.
    static Profile quadratic();
    /// h(x) = (L/pi)^2 sin^2(pi x / L), periodic with period L.
    static Profile sine_squared(double L);
    /// h(x) = 2 (1 - cos x), the same curve as sine_squared(2 pi).
    static Profile one_minus_cos();

    /// Adds alpha * sin^3(pi x / L), a cubic deformation with unchanged 2-jet.
    Profile plus_sine_cubed(double alpha, double L) const;

    double operator()(double x) const { return value_(x); }
    double slope(double x) const { return slope_(x); }
    const std::string& name() const { return name_; }

private:
    Fn value_;
    Fn slope_;
    std::string name_;
};

// ============================================================================
// Field families
// ============================================================================

/// x1' = mu1 + x1^2 + delta1 x2,  x2' = mu2 + x2^2 + delta2 x1 on the plane.
struct ReducedBox {
    double mu1{}, mu2{}, delta1{}, delta2{};
};

/// X1' = lambda1 - cos X1 + eps1 sin X2,  X2' = lambda2 - cos X2 + eps2 sin X1 on [0, 2 pi)^2.
struct ExplicitFamily {
    double lambda1{}, lambda2{}, eps1{}, eps2{};

    /// Near lambda = 1 the substitution x = X/2 gives x' = (lambda - 1)/2 + x^2 + eps x_other + ...,
    /// so mu_j = (lambda_j - 1)/2 and delta_j = lambda_j eps_j.
    static ExplicitFamily from_normalized(double mu1, double mu2, double eps1, double eps2) {
        return {1.0 + 2.0 * mu1, 1.0 + 2.0 * mu2, eps1, eps2};
    }
    double mu1() const { return 0.5 * (lambda1 - 1.0); }
    double mu2() const { return 0.5 * (lambda2 - 1.0); }
};

/// Linear flow x' = (c1, c2).
struct ConstantField {
    double c1{}, c2{};
    TorusGeometry geometry{};
};

/// Uncoupled product x_j' = mu_j + v_j(x_j).
struct ProductSnic {
    double mu1{}, mu2{};
    Profile v1 = Profile::one_minus_cos();
    Profile v2 = Profile::one_minus_cos();
    TorusGeometry geometry{};
};

/// Coupling terms (g1, g2) added to a product field. Gradients are optional;
/// without them the Jacobian falls back to central differences.
struct Coupling {
    std::function<double(double, double)> g1;
    std::function<double(double, double)> g2;
    std::function<Vec2(double, double)> grad_g1;
    std::function<Vec2(double, double)> grad_g2;
};

/// Product field plus a coupling whose size is declared by delta.
struct PerturbedProduct {
    ProductSnic base;
    Coupling coupling;
    double delta{};
};

using FieldSpec = std::variant<ReducedBox, ExplicitFamily, ProductSnic, PerturbedProduct, ConstantField>;

/// Reduced box embedded in the torus of side L:
/// x_j' = mu_j + (L/pi)^2 sin^2(pi x_j / L) + delta_j (L / 2 pi) sin(2 pi x_other / L).
PerturbedProduct sine_embedded_box(double mu1, double mu2, double delta1, double delta2, double L = two_pi);

/// Velocity of the selected family at p, evaluated directly from its formula.
Vec2 eval_field(const FieldSpec& f, Vec2 p);
TorusGeometry geometry_of(const FieldSpec& f);

// ============================================================================
// Field: a FieldSpec with a time orientation
// ============================================================================

class Field {
public:
    Field(FieldSpec spec, double time_sign = 1.0);  // NOLINT(google-explicit-constructor)
    template <class Spec>
        requires(!std::is_same_v<std::decay_t<Spec>, FieldSpec> && !std::is_same_v<std::decay_t<Spec>, Field> &&
                 std::is_constructible_v<FieldSpec, Spec>)
    Field(Spec&& spec, double time_sign = 1.0)  // NOLINT(google-explicit-constructor)
        : Field(FieldSpec(std::forward<Spec>(spec)), time_sign) {}

    Vec2 operator()(Vec2 p) const {
        Vec2 v = eval_field(spec_, p);
        return sign_ > 0 ? v : -v;
    }
    Mat2 jacobian(Vec2 p) const;
    double divergence(Vec2 p) const { return jacobian(p).trace(); }

    /// Same field with time reversed.
    Field reversed() const { return Field(spec_, -sign_); }
    bool is_reversed() const { return sign_ < 0; }
    double time_sign() const { return sign_; }

    const FieldSpec& spec() const { return spec_; }
    const TorusGeometry& geometry() const { return geometry_; }
    /// True when an analytic Jacobian is available for every term.
    bool has_analytic_jacobian() const;

    /// Linear coupling coefficients (delta1, delta2) = (dv1/dx2, dv2/dx1) at the origin
    /// in normalized coordinates.
    Vec2 linear_coupling() const;

private:
    FieldSpec spec_;
    double sign_;
    TorusGeometry geometry_;
};

Mat2 jacobian_fd(const Field& f, Vec2 p, double h = 1e-6);

// ============================================================================
// Two-parameter families (mu1, mu2) -> Field
// ============================================================================

enum class FamilyKind { reduced_box, explicit_family, sine_box, custom };

/// A field family over normalized unfolding parameters (mu1, mu2). delta1/delta2 carry
/// the coupling sizes (eps for the explicit family).
struct Family {
    FamilyKind kind = FamilyKind::reduced_box;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double L = two_pi;
    bool reversed = false;
    std::function<FieldSpec(double, double)> custom;

    static Family make(FamilyKind k, double d1, double d2, double L = two_pi) {
        Family f;
        f.kind = k;
        f.delta1 = d1;
        f.delta2 = d2;
        f.L = L;
        return f;
    }
    static Family reduced_box(double d1, double d2) { return make(FamilyKind::reduced_box, d1, d2); }
    static Family explicit_family(double eps1, double eps2) { return make(FamilyKind::explicit_family, eps1, eps2); }
    static Family sine_box(double d1, double d2, double L = two_pi) { return make(FamilyKind::sine_box, d1, d2, L); }
    static Family uncoupled(double L = two_pi) { return make(FamilyKind::sine_box, 0.0, 0.0, L); }

    FieldSpec spec_at(double mu1, double mu2) const;
    Field at(double mu1, double mu2) const { return Field(spec_at(mu1, mu2), reversed ? -1.0 : 1.0); }
    Family time_reversed() const {
        Family r = *this;
        r.reversed = !reversed;
        return r;
    }
    /// Declared coupling magnitude max(|delta1|, |delta2|).
    double delta() const { return std::max(std::abs(delta1), std::abs(delta2)); }
    std::string name() const;
};

FamilyKind parse_family_kind(const std::string& name);

}  // namespace snic
