#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "snictorus/curves.hpp"
#include "snictorus/equilibria.hpp"
#include "snictorus/errors.hpp"

using namespace snic;

namespace {

const Equilibrium* nearest(const std::vector<Equilibrium>& eqs, Vec2 p) {
    const Equilibrium* best = nullptr;
    for (const auto& e : eqs)
        if (!best || norm(e.p - p) < norm(best->p - p)) best = &e;
    return best;
}

}  // namespace

TEST_CASE("uncoupled box: the four tartan equilibria") {
    const auto eqs = find_equilibria(Field(ReducedBox{-0.25, -0.25, 0, 0}));
    REQUIRE(eqs.size() == 4);
    const auto* sink = nearest(eqs, {-0.5, -0.5});
    const auto* source = nearest(eqs, {0.5, 0.5});
    const auto* s1 = nearest(eqs, {0.5, -0.5});
    const auto* s2 = nearest(eqs, {-0.5, 0.5});
    CHECK(norm(sink->p - Vec2{-0.5, -0.5}) < 1e-12);
    CHECK(sink->kind == EquilibriumKind::sink);
    CHECK(source->kind == EquilibriumKind::source);
    CHECK(s1->kind == EquilibriumKind::saddle);
    CHECK(s2->kind == EquilibriumKind::saddle);
    for (const auto& e : eqs) CHECK(e.residual <= 1e-12);
}

TEST_CASE("equilibria at the cusp") {
    const double d1 = 0.5, d2 = 0.3;
    const CuspData c = cusp(d1, d2);
    const auto eqs = find_equilibria(Field(ReducedBox{c.mu.x1, c.mu.x2, d1, d2}));
    // The eps = +1 saddle of the coexisting pair merges with the triple point here.
    REQUIRE(eqs.size() == 2);
    const auto* triple = nearest(eqs, c.x);
    CHECK(norm(triple->p - c.x) < 1e-5);
    CHECK(triple->kind == EquilibriumKind::saddle_node);
    const Vec2 sink = coexisting_equilibria(d1, d2, c.theta_c, -1);
    const auto* s = nearest(eqs, sink);
    CHECK(norm(s->p - sink) < 1e-9);
    CHECK(s->kind == EquilibriumKind::sink);
}

TEST_CASE("a strictly positive field has no equilibria") {
    CHECK(find_equilibria(Field(ExplicitFamily{2, 2, 0, 0})).empty());
}

TEST_CASE("find_equilibria rejects sparse seed grids") {
    EquilibriumSearch s;
    s.seeds_per_axis = 4;
    CHECK_THROWS_AS(find_equilibria(Field(ExplicitFamily{2, 2, 0, 0}), s), PreconditionError);
}

TEST_CASE("eigen_data closed forms") {
    SUBCASE("origin with delta1 delta2 = 0.15") {
        const Field f(ReducedBox{0.0, 0.0, 0.5, 0.3});
        const EigenData d = eigen_data(classify_at(f, {0, 0}), 0.5, 0.3);
        CHECK(d.values[0].real() == doctest::Approx(std::sqrt(0.15)).epsilon(1e-14));
        CHECK(d.values[1].real() == doctest::Approx(-std::sqrt(0.15)).epsilon(1e-14));
        CHECK(d.values[0].real() == doctest::Approx(0.387298).epsilon(1e-6));
        REQUIRE(d.slopes);
        CHECK((*d.slopes)[0] * (*d.slopes)[1] == doctest::Approx(-0.6).epsilon(1e-14));
    }
    SUBCASE("uncoupled sink has a double eigenvalue") {
        const Field f(ReducedBox{-0.25, -0.25, 0.0, 0.0});
        const EigenData d = eigen_data(classify_at(f, {-0.5, -0.5}), 0.0, 0.0);
        CHECK(d.values[0].real() == doctest::Approx(-1.0));
        CHECK(d.values[1].real() == doctest::Approx(-1.0));
        CHECK(d.values[0].imag() == 0.0);
    }
}

TEST_CASE("classification follows det and trace") {
    CHECK(classify_jacobian({}, Mat2{1, 0, 0, -1}).kind == EquilibriumKind::saddle);
    CHECK(classify_jacobian({}, Mat2{-1, 0, 0, -2}).kind == EquilibriumKind::sink);
    CHECK(classify_jacobian({}, Mat2{1, 0, 0, 2}).kind == EquilibriumKind::source);
    CHECK(classify_jacobian({}, Mat2{1, 0, 0, 0}).kind == EquilibriumKind::saddle_node);
    CHECK(classify_jacobian({}, Mat2{0, 1, 0, 0}).kind == EquilibriumKind::degenerate);
    const Equilibrium focus = classify_jacobian({}, Mat2{-0.1, 1, -1, -0.1});
    CHECK(focus.kind == EquilibriumKind::sink);
    CHECK_FALSE(focus.slopes.has_value());
}

TEST_CASE("property: reduced-box equilibria satisfy the closed forms") {
    auto g = test::rng(10);
    int checked = 0;
    for (int k = 0; k < 300; ++k) {
        const double d1 = test::uniform(g, 0.05, 1.0), d2 = test::uniform(g, 0.05, 1.0);
        const Vec2 x{test::uniform(g, -1, 1), test::uniform(g, -1, 1)};
        const Vec2 mu{-x.x1 * x.x1 - d1 * x.x2, -x.x2 * x.x2 - d2 * x.x1};
        const Field f(ReducedBox{mu.x1, mu.x2, d1, d2});
        const auto eqs = find_equilibria(f);
        const auto* e = nearest(eqs, x);
        REQUIRE(e != nullptr);
        CHECK(norm(e->p - x) < 1e-8);
        for (const auto& q : eqs) {
            CHECK(q.det == doctest::Approx(4 * q.p.x1 * q.p.x2 - d1 * d2).epsilon(1e-12));
            CHECK(q.tr == doctest::Approx(2 * (q.p.x1 + q.p.x2)).epsilon(1e-12));
            CHECK(-q.p.x1 * q.p.x1 - d1 * q.p.x2 == doctest::Approx(mu.x1).epsilon(1e-12));
            CHECK(-q.p.x2 * q.p.x2 - d2 * q.p.x1 == doctest::Approx(mu.x2).epsilon(1e-12));
            const Mat2 n = jacobian_fd(f, q.p);
            CHECK(n.a11 == doctest::Approx(2 * q.p.x1).epsilon(1e-8));
            CHECK(n.a12 == doctest::Approx(d1).epsilon(1e-8));
            CHECK(n.a21 == doctest::Approx(d2).epsilon(1e-8));
            CHECK(n.a22 == doctest::Approx(2 * q.p.x2).epsilon(1e-8));
            if (q.is_node()) {
                CHECK(q.eigenvalues[0].imag() == 0.0);
                CHECK(q.slopes.has_value());
            }
            ++checked;
        }
    }
    CHECK(checked >= 300);
}

TEST_CASE("property: eigenvectors are orthogonal in the weighted inner product") {
    auto g = test::rng(11);
    for (int k = 0; k < 500; ++k) {
        const double d1 = test::uniform(g, 0.05, 1.0), d2 = test::uniform(g, 0.05, 1.0);
        const Vec2 x{test::uniform(g, -1, 1), test::uniform(g, -1, 1)};
        const Vec2 mu{-x.x1 * x.x1 - d1 * x.x2, -x.x2 * x.x2 - d2 * x.x1};
        const Equilibrium e = classify_at(Field(ReducedBox{mu.x1, mu.x2, d1, d2}), x);
        const EigenData d = eigen_data(e, d1, d2);
        REQUIRE(d.vectors);
        REQUIRE(d.slopes);
        const auto& v = *d.vectors;
        CHECK(std::abs(weighted_inner(v[0], v[1], d1, d2)) < 1e-10);
        CHECK((*d.slopes)[0] * (*d.slopes)[1] == doctest::Approx(-d2 / d1).epsilon(1e-10));
        const double R = std::sqrt((x.x2 - x.x1) * (x.x2 - x.x1) + d1 * d2);
        CHECK(d.values[0].real() == doctest::Approx(x.x1 + x.x2 + R).epsilon(1e-12));
        CHECK(d.values[1].real() == doctest::Approx(x.x1 + x.x2 - R).epsilon(1e-12));
    }
}

TEST_CASE("x2-nullcline slope bound on the strip mu2 <= -2 delta") {
    const double delta = 0.05;
    for (double mu2 : {-0.1, -0.2}) {
        const Field f = Family::sine_box(delta, delta).at(0.03, mu2);
        const double bound = delta / std::sqrt(-mu2);
        double prev = *x2_nullcline(f, 0.0, std::sqrt(-mu2));
        const double h = two_pi / 400;
        for (int i = 1; i <= 400; ++i) {
            const auto x2 = x2_nullcline(f, i * h, prev);
            REQUIRE(x2.has_value());
            CHECK(std::abs(*x2 - prev) / h <= bound);
            prev = *x2;
        }
    }
}

TEST_CASE("equilibrium counts in the regions of the reduced box") {
    const Family fam = Family::reduced_box(0.5, 0.3);
    const ParameterGrid grid{-0.3, 0.1, -0.25, 0.1, 2, 2};
    const CountRaster r = equilibrium_count_map(fam, grid);
    CHECK(r.at(0, 0) == 4);
    CHECK(r.at(1, 1) == 0);
    CHECK(find_equilibria(fam.at(0.05, -0.2)).size() == 2);
}

TEST_CASE("equilibria serialize to JSON records") {
    std::ostringstream out;
    write_equilibria_json(out, find_equilibria(Field(ReducedBox{-0.25, -0.25, 0, 0})));
    const std::string s = out.str();
    CHECK(std::count(s.begin(), s.end(), '{') == 4);
    CHECK(s.find("\"kind\": \"sink\"") != std::string::npos);
    CHECK(s.find("\"eigenvalues\"") != std::string::npos);
}
