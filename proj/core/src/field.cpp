#include "snictorus/field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "snictorus/errors.hpp"

namespace snic {

namespace {
constexpr double pi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double central_difference(const std::function<double(double, double)>& g, double x1, double x2, int axis, double h) {
    if (axis == 0) return (g(x1 + h, x2) - g(x1 - h, x2)) / (2.0 * h);
    return (g(x1, x2 + h) - g(x1, x2 - h)) / (2.0 * h);
}

Vec2 coupling_gradient(const std::function<double(double, double)>& g,
                       const std::function<Vec2(double, double)>& grad, Vec2 p) {
    if (!g) return {};
    if (grad) return grad(p.x1, p.x2);
    const double h = 1e-6 * std::max(1.0, max_abs(p));
    return {central_difference(g, p.x1, p.x2, 0, h), central_difference(g, p.x1, p.x2, 1, h)};
}
}  // namespace

// ============================================================================
// Profile
// ============================================================================

Profile Profile::quadratic() {
    return Profile([](double x) { return x * x; }, [](double x) { return 2.0 * x; }, "quadratic");
}

Profile Profile::sine_squared(double L) {
    if (!(L > 0.0)) throw PreconditionError("sine_squared: L must be positive");
    const double k = pi / L;
    const double a = 1.0 / (k * k);
    return Profile(
        [k, a](double x) {
            const double s = std::sin(k * x);
            return a * s * s;
        },
        [k, a](double x) { return a * k * std::sin(2.0 * k * x); },
        "sine_squared");
}

Profile Profile::one_minus_cos() {
    return Profile([](double x) { return 2.0 * (1.0 - std::cos(x)); }, [](double x) { return 2.0 * std::sin(x); },
                   "one_minus_cos");
}

Profile Profile::plus_sine_cubed(double alpha, double L) const {
    const double k = pi / L;
    Fn v = value_;
    Fn s = slope_;
    return Profile(
        [v, alpha, k](double x) {
            const double sn = std::sin(k * x);
            return v(x) + alpha * sn * sn * sn;
        },
        [s, alpha, k](double x) {
            const double sn = std::sin(k * x);
            return s(x) + 3.0 * alpha * k * sn * sn * std::cos(k * x);
        },
        name_ + "+sin3");
}

// ============================================================================
// Families
// ============================================================================

PerturbedProduct sine_embedded_box(double mu1, double mu2, double delta1, double delta2, double L) {
    const double k = two_pi / L;
    const double a = L / two_pi;
    Coupling c;
    c.g1 = [=](double, double x2) { return delta1 * a * std::sin(k * x2); };
    c.g2 = [=](double x1, double) { return delta2 * a * std::sin(k * x1); };
    c.grad_g1 = [=](double, double x2) { return Vec2{0.0, delta1 * std::cos(k * x2)}; };
    c.grad_g2 = [=](double x1, double) { return Vec2{delta2 * std::cos(k * x1), 0.0}; };
    ProductSnic base{mu1, mu2, Profile::sine_squared(L), Profile::sine_squared(L), TorusGeometry(L, L)};
    return PerturbedProduct{std::move(base), std::move(c), std::max(std::abs(delta1), std::abs(delta2))};
}

Vec2 eval_field(const FieldSpec& f, Vec2 p) {
    return std::visit(
        overloaded{
            [&](const ReducedBox& r) {
                return Vec2{r.mu1 + p.x1 * p.x1 + r.delta1 * p.x2, r.mu2 + p.x2 * p.x2 + r.delta2 * p.x1};
            },
            [&](const ExplicitFamily& e) {
                return Vec2{e.lambda1 - std::cos(p.x1) + e.eps1 * std::sin(p.x2),
                            e.lambda2 - std::cos(p.x2) + e.eps2 * std::sin(p.x1)};
            },
            [&](const ProductSnic& s) { return Vec2{s.mu1 + s.v1(p.x1), s.mu2 + s.v2(p.x2)}; },
            [&](const PerturbedProduct& s) {
                Vec2 v{s.base.mu1 + s.base.v1(p.x1), s.base.mu2 + s.base.v2(p.x2)};
                if (s.coupling.g1) v.x1 += s.coupling.g1(p.x1, p.x2);
                if (s.coupling.g2) v.x2 += s.coupling.g2(p.x1, p.x2);
                return v;
            },
            [&](const ConstantField& c) { return Vec2{c.c1, c.c2}; },
        },
        f);
}

TorusGeometry geometry_of(const FieldSpec& f) {
    return std::visit(overloaded{
                          [](const ReducedBox&) { return TorusGeometry::plane(); },
                          [](const ExplicitFamily&) { return TorusGeometry(two_pi, two_pi); },
                          [](const ProductSnic& s) { return s.geometry; },
                          [](const PerturbedProduct& s) { return s.base.geometry; },
                          [](const ConstantField& c) { return c.geometry; },
                      },
                      f);
}

Field::Field(FieldSpec spec, double time_sign)
    : spec_(std::move(spec)), sign_(time_sign < 0 ? -1.0 : 1.0), geometry_(geometry_of(spec_)) {}

Mat2 Field::jacobian(Vec2 p) const {
    Mat2 j = std::visit(
        overloaded{
            [&](const ReducedBox& r) { return Mat2{2.0 * p.x1, r.delta1, r.delta2, 2.0 * p.x2}; },
            [&](const ExplicitFamily& e) {
                return Mat2{std::sin(p.x1), e.eps1 * std::cos(p.x2), e.eps2 * std::cos(p.x1), std::sin(p.x2)};
            },
            [&](const ProductSnic& s) { return Mat2{s.v1.slope(p.x1), 0.0, 0.0, s.v2.slope(p.x2)}; },
            [&](const PerturbedProduct& s) {
                const Vec2 g1 = coupling_gradient(s.coupling.g1, s.coupling.grad_g1, p);
                const Vec2 g2 = coupling_gradient(s.coupling.g2, s.coupling.grad_g2, p);
                return Mat2{s.base.v1.slope(p.x1) + g1.x1, g1.x2, g2.x1, s.base.v2.slope(p.x2) + g2.x2};
            },
            [&](const ConstantField&) { return Mat2{}; },
        },
        spec_);
    return sign_ > 0 ? j : -1.0 * j;
}

bool Field::has_analytic_jacobian() const {
    if (const auto* s = std::get_if<PerturbedProduct>(&spec_)) {
        return (!s->coupling.g1 || s->coupling.grad_g1) && (!s->coupling.g2 || s->coupling.grad_g2);
    }
    return true;
}

Vec2 Field::linear_coupling() const {
    const Mat2 j = sign_ * jacobian(Vec2{});
    if (const auto* e = std::get_if<ExplicitFamily>(&spec_)) {
        return {e->lambda1 * e->eps1, e->lambda2 * e->eps2};
    }
    return {j.a12, j.a21};
}

Mat2 jacobian_fd(const Field& f, Vec2 p, double h) {
    const double s = h * std::max(1.0, max_abs(p));
    const Vec2 d1 = (f(p + Vec2{s, 0.0}) - f(p - Vec2{s, 0.0})) * (0.5 / s);
    const Vec2 d2 = (f(p + Vec2{0.0, s}) - f(p - Vec2{0.0, s})) * (0.5 / s);
    return {d1.x1, d2.x1, d1.x2, d2.x2};
}

// ============================================================================
// Family
// ============================================================================

FieldSpec Family::spec_at(double mu1, double mu2) const {
    switch (kind) {
        case FamilyKind::reduced_box:
            return ReducedBox{mu1, mu2, delta1, delta2};
        case FamilyKind::explicit_family:
            return ExplicitFamily::from_normalized(mu1, mu2, delta1, delta2);
        case FamilyKind::sine_box:
            return sine_embedded_box(mu1, mu2, delta1, delta2, L);
        case FamilyKind::custom:
            if (!custom) throw PreconditionError("Family: custom family without a generator");
            return custom(mu1, mu2);
    }
    throw PreconditionError("Family: unknown kind");
}

std::string Family::name() const {
    switch (kind) {
        case FamilyKind::reduced_box: return "reduced_box";
        case FamilyKind::explicit_family: return "explicit";
        case FamilyKind::sine_box: return "sine_box";
        case FamilyKind::custom: return "custom";
    }
    return "custom";
}

FamilyKind parse_family_kind(const std::string& name) {
    if (name == "reduced_box" || name == "box") return FamilyKind::reduced_box;
    if (name == "explicit") return FamilyKind::explicit_family;
    if (name == "sine_box" || name == "uncoupled") return FamilyKind::sine_box;
    throw PreconditionError("unknown family '" + name + "' (expected reduced_box, explicit, sine_box or uncoupled)");
}

}  // namespace snic
