#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "snictorus/rotation.hpp"

using namespace snic;

namespace {

/// Period of x' = mu + 2 (1 - cos x) over one revolution.
double snic_period(double mu) {
    return test::quad([mu](double x) { return 1.0 / (mu + 2.0 * (1.0 - std::cos(x))); }, 0.0, two_pi);
}

}  // namespace

TEST_CASE("homology direction of a linear flow") {
    const double T1 = 2.0, T2 = 3.0;
    const auto h = homology_direction(Field(ConstantField{1 / T1, 1 / T2, {}}), {0.1, 0.2}, 1e3);
    REQUIRE_FALSE(h.zero);
    CHECK(h.h.x1 == doctest::Approx(3 / std::sqrt(13.0)).epsilon(1e-6));
    CHECK(h.h.x2 == doctest::Approx(2 / std::sqrt(13.0)).epsilon(1e-6));
    CHECK(std::hypot(h.h.x1, h.h.x2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("homology direction of the symmetric explicit flow") {
    const auto h = homology_direction(Field(ExplicitFamily{2, 2, 0, 0}), {0.3, 1.1}, 1e3);
    REQUIRE_FALSE(h.zero);
    CHECK(h.h.x1 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK(h.h.x2 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
}

TEST_CASE("orbits of a tartan stay bounded") {
    const Field f = Family::uncoupled().at(-0.04, -0.04);
    for (Vec2 p : {Vec2{1.0, 2.0}, Vec2{4.0, 0.5}, Vec2{3.0, 3.0}}) CHECK(homology_direction(f, p).zero);
}

TEST_CASE("global cross-sections") {
    CHECK(has_global_cross_section(Field(ExplicitFamily{2, 2, 0, 0})));
    CHECK_FALSE(has_global_cross_section(Family::uncoupled().at(-0.04, -0.04)));
    const double delta = 0.02;
    CHECK(has_global_cross_section(Family::sine_box(delta, delta).at(0.1, 0.1)));
    CHECK_FALSE(has_global_cross_section(Field(ReducedBox{0.1, 0.1, 0, 0})));
}

TEST_CASE("regime labels of the uncoupled and explicit families") {
    SUBCASE("symmetric explicit flow") {
        const RegimeLabel l = classify_regime(Field(ExplicitFamily{2, 2, 0, 0}));
        CHECK(l.kind == RegimeKind::poincare);
        CHECK(l.type == Homotopy{1, 1});
        CHECK(l.evidence.equilibria == 0);
        CHECK(l.evidence.cross_section);
    }
    SUBCASE("x2 circulates when mu1 < 0 < mu2") {
        const RegimeLabel l = classify_regime(Family::uncoupled().at(-0.04, 0.09));
        CHECK(l.kind == RegimeKind::poincare);
        CHECK(l.type == Homotopy{0, 1});
        CHECK(l.evidence.equilibria == 0);
    }
    SUBCASE("both locked") {
        const RegimeLabel l = classify_regime(Family::uncoupled().at(-0.04, -0.04));
        CHECK(l.kind == RegimeKind::fully_mode_locked);
        CHECK(l.evidence.equilibria == 4);
    }
}

TEST_CASE("rotation number of an uncoupled return map") {
    const double mu1 = 0.05, mu2 = 0.11;
    const Field f = Family::uncoupled().at(mu1, mu2);
    CrossSection s;
    s.kind = SectionKind::x1_const;
    s.sign = 1;
    s.level = 0.0;
    s.margin = mu1;
    const ReturnMap map(f, s);
    const RotationEstimate r = rotation_number(map, 0.3, 1024);
    const double expected = snic_period(mu1) / snic_period(mu2);
    const double frac = r.rho - std::floor(r.rho);
    CHECK(r.confidence <= 1.0 / 1024 + 1e-15);
    CHECK(std::abs(frac - (expected - std::floor(expected))) <= r.confidence);
    CHECK(map.period() == doctest::Approx(two_pi));
}

TEST_CASE("property: the lifted return map commutes with the period") {
    const Field f(ExplicitFamily{1.3, 1.1, 0.1, 0.05});
    const auto s = find_global_cross_section(f);
    REQUIRE(s.has_value());
    const ReturnMap map(f, *s);
    auto g = test::rng(30);
    for (int k = 0; k < 10; ++k) {
        const double u = test::uniform(g, 0, map.period());
        CHECK(map.iterate(u + map.period(), 1) == doctest::Approx(map.iterate(u, 1) + map.period()).epsilon(1e-9));
        CHECK(map.iterate(u + 1e-3, 1) > map.iterate(u, 1));
    }
}

TEST_CASE("a reported rational type is backed by a periodic orbit") {
    const Field f(ExplicitFamily{2, 2, 0.3, 0.3});
    const RegimeLabel l = classify_regime(f);
    REQUIRE(l.kind == RegimeKind::poincare);
    const auto s = find_global_cross_section(f);
    REQUIRE(s.has_value());
    const ReturnMap map(f, *s);
    const auto orbits = find_periodic_orbits(map, rotation_number(map));
    REQUIRE_FALSE(orbits.empty());
    bool matched = false;
    for (const auto& o : orbits) matched |= o.type == l.type && o.residual < 1e-9;
    CHECK(matched);
}

TEST_CASE("property: Poincare direction does not depend on the start point") {
    const Field f(ExplicitFamily{1.3, 1.15, 0.05, 0.03});
    auto g = test::rng(31);
    const auto a = homology_direction(f, {test::uniform(g, 0, 6), test::uniform(g, 0, 6)});
    const auto b = homology_direction(f, {test::uniform(g, 0, 6), test::uniform(g, 0, 6)});
    CHECK(norm(a.h - b.h) <= 2 * std::max(a.confidence, b.confidence) + 1e-12);
}

TEST_CASE("property: time reversal keeps the Poincare type") {
    for (const Field& f : {Field(ExplicitFamily{2, 2, 0, 0}), Field(ExplicitFamily{2, 2, 0.3, 0.3}),
                           Family::uncoupled().at(0.09, -0.04)}) {
        const RegimeLabel a = classify_regime(f);
        const RegimeLabel b = classify_regime(f.reversed());
        REQUIRE(a.kind == RegimeKind::poincare);
        CHECK(b.kind == RegimeKind::poincare);
        CHECK(a.type == b.type);
    }
}

TEST_CASE("Cherry flow next to the coexistence horn") {
    const RegimeLabel l = classify_regime(Family::sine_box(0.5, 0.5).at(-0.07, 0.16));
    CHECK(l.kind == RegimeKind::cherry);
    CHECK(l.type == Homotopy{0, 1});
    CHECK(l.evidence.equilibria > 0);
    CHECK(l.evidence.winding_orbits > 0);
}

TEST_CASE("label invariants") {
    for (const Field& f : {Family::uncoupled().at(-0.04, -0.04), Family::uncoupled().at(0.05, 0.08),
                           Family::explicit_family(0.01, 0.006).at(-0.1, 0.1)}) {
        const RegimeLabel l = classify_regime(f);
        if (l.kind == RegimeKind::poincare || l.kind == RegimeKind::poincare_irrational) {
            CHECK(l.evidence.cross_section);
        }
        if (l.kind == RegimeKind::fully_mode_locked || l.kind == RegimeKind::cherry) CHECK(l.evidence.equilibria >= 1);
        if (l.kind == RegimeKind::poincare || l.kind == RegimeKind::cherry) CHECK((l.type.p != 0 || l.type.q != 0));
    }
}

TEST_CASE("homotopy helpers") {
    CHECK(normalize_homotopy(4, 6) == Homotopy{2, 3});
    CHECK(normalize_homotopy(-2, -4) == Homotopy{1, 2});
    CHECK(normalize_homotopy(0, -3) == Homotopy{0, 1});
    const auto r = rational_direction({2.0, 1.0}, 12, 1e-6);
    REQUIRE(r.has_value());
    CHECK(*r == Homotopy{2, 1});
    CHECK_FALSE(rational_direction({std::numbers::sqrt2, 1.0}, 3, 1e-9).has_value());
}

TEST_CASE("winding sweep of the uncoupled family") {
    const auto w = winding_sweep(Family::uncoupled(), 0.2, -0.09, 0.09, 7);
    REQUIRE(w.size() == 7);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i].angle > w[i - 1].angle);
    CHECK(w.front().angle < 0.5);
    CHECK(w.back().angle > std::numbers::pi / 2 - 0.5);
    CHECK(w[3].angle == doctest::Approx(std::numbers::pi / 4).epsilon(1e-6));
    for (const auto& s : w) {
        const double T1 = snic_period(s.mu.x1), T2 = snic_period(s.mu.x2);
        CHECK(s.angle == doctest::Approx(std::atan2(T1, T2)).epsilon(1e-3));
    }
}
