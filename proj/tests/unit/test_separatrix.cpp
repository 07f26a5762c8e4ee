#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "../support/oracles.hpp"
#include "snictorus/errors.hpp"
#include "snictorus/separatrix.hpp"

using namespace snic;
using std::numbers::pi;

namespace {

const SaddleBranch& branch(const BranchSet& s, char c) {
    switch (c) {
        case 'A': return s.A;
        case 'B': return s.B;
        case 'C': return s.C;
        default: return s.D;
    }
}

}  // namespace

TEST_CASE("basic tartan of the uncoupled and explicit families") {
    for (const Field& f : {Family::uncoupled().at(-0.04, -0.04), Family::explicit_family(0.01, 0.006).at(-0.05, -0.05)}) {
        const TartanReport r = verify_basic_tartan(f);
        CHECK(r.basic);
        CHECK(r.reason == TartanReason::ok);
        REQUIRE(r.connections.size() == 8);
        for (const auto& c : r.connections) {
            CHECK(c.captured());
            CHECK(std::abs(c.m) + std::abs(c.n) <= 1);
        }
    }
}

TEST_CASE("no tartan above the outer saddle-node curve") {
    const TartanReport r = verify_basic_tartan(Family::uncoupled().at(0.04, 0.04));
    CHECK_FALSE(r.basic);
    CHECK(r.reason == TartanReason::wrong_equilibrium_count);
    const TartanReport e = verify_basic_tartan(Family::explicit_family(0.01, 0.006).at(0.05, 0.05));
    CHECK_FALSE(e.basic);
}

TEST_CASE("branch labels follow the eigen-directions") {
    const Field f = Family::explicit_family(0.01, 0.006).at(-0.05, -0.05);
    const auto eqs = find_equilibria(f);
    const auto set = label_branches(f, eqs);
    REQUIRE(set.has_value());
    CHECK(set->A.stability == Stability::stable);
    CHECK(set->C.stability == Stability::stable);
    CHECK(set->B.stability == Stability::unstable);
    CHECK(set->D.stability == Stability::unstable);
    CHECK(set->D.direction.x2 > 0.0);
    CHECK(set->B.direction.x1 > 0.0);
    CHECK(std::abs(set->D.direction.x2) > std::abs(set->D.direction.x1));
    CHECK(std::abs(set->B.direction.x1) > std::abs(set->B.direction.x2));
    CHECK(set->all.size() == 8);
    for (const auto& b : set->all) {
        CHECK(std::hypot(b.direction.x1, b.direction.x2) == doctest::Approx(1.0).epsilon(1e-12));
        const Vec2 Jd = f.jacobian(b.saddle.p) * b.direction;
        CHECK(std::abs(Jd.x1 * b.direction.x2 - Jd.x2 * b.direction.x1) < 1e-10);
    }
    CHECK_FALSE(label_branches(Field(ExplicitFamily{2, 2, 0, 0}), {}).has_value());
}

TEST_CASE("saddle_branches preconditions") {
    const Equilibrium sink = classify_jacobian({}, Mat2{-1, 0, 0, -2});
    CHECK_THROWS_AS(saddle_branches(sink, 1e-6), PreconditionError);
    const Equilibrium saddle = classify_jacobian({}, Mat2{1, 0, 0, -1});
    CHECK(saddle_branches(saddle, 1e-6).size() == 4);
    CHECK_THROWS_AS(saddle_branches(saddle, 0.0), PreconditionError);
}

TEST_CASE("centered representatives") {
    const TorusGeometry g(two_pi, two_pi);
    const Vec2 c = centered({4.0, -4.0}, g);
    CHECK(c.x1 == doctest::Approx(4.0 - two_pi));
    CHECK(c.x2 == doctest::Approx(two_pi - 4.0));
    CHECK(centered({0.5, -0.5}, g) == Vec2{0.5, -0.5});
}

TEST_CASE("property: connections do not depend on the launch offset") {
    const Field f = Family::explicit_family(0.01, 0.006).at(-0.05, -0.05);
    const auto eqs = find_equilibria(f);
    const double h = default_launch_offset(f);
    CHECK(h == doctest::Approx(1e-6 * std::sqrt(0.01 * 0.006)));
    const auto set = label_branches(f, eqs, h);
    REQUIRE(set.has_value());
    for (char c : {'A', 'B', 'C', 'D'}) {
        SaddleBranch b = branch(*set, c);
        const ConnectionResult r1 = trace_branch(f, b, eqs);
        b.h *= 0.5;
        const ConnectionResult r2 = trace_branch(f, b, eqs);
        CHECK(r1.kind == r2.kind);
        CHECK(r1.m == r2.m);
        CHECK(r1.n == r2.n);
        CHECK(r1.target == r2.target);
    }
}

TEST_CASE("property: tracing commutes with lattice translations") {
    const Field f = Family::explicit_family(0.01, 0.006).at(-0.05, -0.05);
    const auto eqs = find_equilibria(f);
    const auto set = label_branches(f, eqs);
    REQUIRE(set.has_value());
    const TorusGeometry& g = f.geometry();
    for (auto [m, n] : {std::pair{1, 0}, std::pair{0, -1}, std::pair{2, 3}}) {
        for (char c : {'B', 'D'}) {
            const ConnectionResult a = trace_branch(f, branch(*set, c), eqs);
            const ConnectionResult b = trace_branch(f, branch(*set, c).translated(m, n, g), eqs);
            CHECK(a.kind == b.kind);
            CHECK(a.m == b.m);
            CHECK(a.n == b.n);
            CHECK(norm(b.end - a.end - Vec2{m * g.L1, n * g.L2}) < 0.1 * 1e-4 * two_pi);
            CHECK(b.time == doctest::Approx(a.time).epsilon(1e-2));
        }
    }
}

TEST_CASE("property: gaps of a symmetric family are swapped by the reflection") {
    const Family fam = Family::sine_box(0.1, 0.1);
    auto g = test::rng(50);
    for (int k = 0; k < 4; ++k) {
        const double a = test::uniform(g, -0.016, -0.012), b = test::uniform(g, -0.015, -0.005);
        const double gd = branch_gap_at_section(fam.at(a, b), GapKind::D_A01, pi);
        const double gb = branch_gap_at_section(fam.at(b, a), GapKind::B_C10, pi);
        CHECK(gd == doctest::Approx(gb).epsilon(1e-8).scale(1e-6));
    }
}

TEST_CASE("heteroclinic roots on the diagonal slices agree") {
    const Family fam = Family::sine_box(0.1, 0.1);
    const HeteroclinicRoot d = find_heteroclinic(fam, {{-0.012, 0}, {0, 1}}, GapKind::D_A01, pi, -0.015, -0.0105);
    const HeteroclinicRoot b = find_heteroclinic(fam, {{0, -0.012}, {1, 0}}, GapKind::B_C10, pi, -0.015, -0.0105);
    CHECK(std::abs(d.s - b.s) < 1e-6);
    CHECK(std::abs(d.gap) < 1e-9);
    CHECK(d.mu == Vec2{-0.012, d.s});
    CHECK(b.mu == Vec2{b.s, -0.012});
    CHECK(d.s > -0.015);
    CHECK(d.s < -0.0105);
}

TEST_CASE("find_heteroclinic on scalar gaps") {
    const HeteroclinicRoot r = find_heteroclinic([](double s) { return std::tanh(s - 0.3); }, 0.0, 1.0, 1e-12);
    CHECK(r.s == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(r.evaluations < 60);
    CHECK_THROWS_AS(find_heteroclinic([](double s) { return 1.0 + s * s; }, -1.0, 1.0), BracketError);
}

TEST_CASE("a branch that misses the section is reported") {
    const Field f = Family::sine_box(0.1, 0.1).at(-0.01, -0.015);
    CHECK_THROWS_AS(branch_gap_at_section(f, GapKind::D_A01, pi), BranchCrossingError);
}

TEST_CASE("cone condition on the repelling circle annulus") {
    auto g = test::rng(51);
    for (int k = 0; k < 6; ++k) {
        const double delta = test::uniform(g, 0.002, 0.005);
        const double mu2 = test::uniform(g, -0.1, -0.04);
        const double mu1 = test::uniform(g, mu2 / 2, 0.1);
        const ConeReport r = cone_condition_check(Family::sine_box(delta, delta).at(mu1, mu2));
        CHECK(r.invariant);
        CHECK(r.min_slack >= -1e-9);
        CHECK(r.expected_rate == doctest::Approx(2 * std::sqrt(-mu2)).epsilon(1e-14));
        CHECK(r.s0 == doctest::Approx(std::sqrt(-mu2)).epsilon(1e-14));
        CHECK(std::abs(r.expansion_rate / r.expected_rate - 1) < 0.25);
        CHECK(r.samples == 8);
    }
}

TEST_CASE("persistence of the vertical circles") {
    const Family fam = Family::sine_box(0.02, 0.012);
    SUBCASE("inside the cusp") {
        const VerticalCirclesReport r = verify_vertical_circles(fam.at(-0.01, -0.01), -0.01, 0.02);
        CHECK(r.inside_cusp);
        CHECK(r.c_minus);
        CHECK(r.c_plus);
        CHECK(r.strip_ok);
        CHECK(r.interval_maps_inside);
    }
    SUBCASE("between the saddle-node curves") {
        const VerticalCirclesReport r = verify_vertical_circles(fam.at(-0.01, 0.0), -0.01, 0.02);
        CHECK_FALSE(r.inside_cusp);
        CHECK(r.c_minus);
        CHECK(r.c_plus);
        REQUIRE(r.periodic_point.has_value());
        CHECK(r.periodic_residual < 1e-9);
        CHECK(r.periodic_point->x2 == doctest::Approx(std::cbrt(0.02) / 2));
    }
}

TEST_CASE("tanh local model") {
    CHECK(tanh_local_model_error(-0.01, 0.012, 0.3, 200) < 1e-9);
    CHECK(tanh_local_model_error(-0.04, 0.05, -0.2, 100) < 1e-9);
}

TEST_CASE("connections serialize to JSON") {
    const TartanReport r = verify_basic_tartan(Family::uncoupled().at(-0.04, -0.04));
    std::ostringstream out;
    write_connections_json(out, r.connections, r.equilibria);
    const std::string s = out.str();
    CHECK(s.front() == '[');
    CHECK(s.find("sink_translate") != std::string::npos);
    CHECK(s.find("source_translate") != std::string::npos);
}
