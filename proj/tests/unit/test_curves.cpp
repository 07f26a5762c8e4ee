#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "snictorus/curves.hpp"
#include "snictorus/equilibria.hpp"
#include "snictorus/errors.hpp"

using namespace snic;

namespace {

constexpr double d1 = 0.5;
constexpr double d2 = 0.3;

/// Saddle-node residual and det of the box Jacobian at (x, mu).
double extended_residual(Vec2 x, Vec2 mu, double a, double b) {
    const double r1 = mu.x1 + x.x1 * x.x1 + a * x.x2;
    const double r2 = mu.x2 + x.x2 * x.x2 + b * x.x1;
    const double det = 4 * x.x1 * x.x2 - a * b;
    return std::max({std::abs(r1), std::abs(r2), std::abs(det)});
}

CurveBranch continue_from(double theta, int sigma, int steps, double sign = 1.0) {
    const SneCurveSample s = sne_analytic(d1, d2, sigma, theta);
    const SneCurveSample n = sne_analytic(d1, d2, sigma, theta + 1e-6);
    ContinuationOptions opts;
    opts.n_steps = steps;
    opts.hint = {sign * (n.x.x1 - s.x.x1), sign * (n.x.x2 - s.x.x2), sign * (n.mu.x1 - s.mu.x1),
                 sign * (n.mu.x2 - s.mu.x2)};
    opts.mu_bound = 0.6;
    return continue_sne(Family::reduced_box(d1, d2), {s.x, s.mu}, opts);
}

}  // namespace

TEST_CASE("sne_analytic on the outer curve at theta = 0") {
    const SneCurveSample s = sne_analytic(d1, d2, -1, 0.0);
    CHECK(s.x.x1 == doctest::Approx(-0.1936492).epsilon(1e-7));
    CHECK(s.x.x2 == doctest::Approx(-0.1936492).epsilon(1e-7));
    CHECK(s.mu.x1 == doctest::Approx(0.0593246).epsilon(1e-6));
    CHECK(s.mu.x2 == doctest::Approx(0.0205948).epsilon(1e-6));
    CHECK(extended_residual(s.x, s.mu, d1, d2) < 1e-15);
}

TEST_CASE("property: analytic samples solve the extended system") {
    auto g = test::rng(20);
    for (int k = 0; k < 500; ++k) {
        const double a = test::uniform(g, 0.01, 1), b = test::uniform(g, 0.01, 1);
        const int sigma = k % 2 ? 1 : -1;
        const SneCurveSample s = sne_analytic(a, b, sigma, test::uniform(g, -2, 2));
        CHECK(s.x.x1 * s.x.x2 == doctest::Approx(a * b / 4).epsilon(1e-12));
        CHECK(extended_residual(s.x, s.mu, a, b) < 1e-13);
    }
}

TEST_CASE("cusp closed forms") {
    const CuspData c = cusp(d1, d2);
    CHECK(c.theta_c == doctest::Approx(std::log(d1 / d2) / 6).epsilon(1e-15));
    CHECK(std::exp(3 * c.theta_c) == doctest::Approx(std::sqrt(d1 / d2)).epsilon(1e-14));
    CHECK(c.mu.x1 == doctest::Approx(-0.75 * d1 * d2 * std::exp(2 * c.theta_c)).epsilon(1e-14));
    CHECK(std::abs(c.mu.x1 - (-0.133383499)) < 1e-9);
    CHECK(std::abs(c.mu.x2 - (-0.094886175)) < 1e-9);
    CHECK(std::abs(c.x.x1 - 0.210858166) < 1e-9);
    CHECK(std::abs(c.x.x2 - 0.177844665) < 1e-9);
    const SneCurveSample s = sne_analytic(d1, d2, 1, c.theta_c);
    CHECK(norm(s.mu - c.mu) < 1e-15);
    CHECK(norm(s.x - c.x) < 1e-15);
}

TEST_CASE("cusp symmetric specialization and scaling") {
    const double d = 0.2;
    const CuspData c = cusp(d, d);
    CHECK(c.theta_c == 0.0);
    CHECK(c.mu.x1 == doctest::Approx(-0.75 * d * d));
    CHECK(c.mu.x2 == doctest::Approx(-0.75 * d * d));
    CHECK(c.x.x1 == doctest::Approx(d / 2));
    const CuspData a = cusp(d1, d2), b = cusp(3 * d1, 3 * d2);
    CHECK(b.mu.x1 == doctest::Approx(9 * a.mu.x1).epsilon(1e-13));
    CHECK(b.mu.x2 == doctest::Approx(9 * a.mu.x2).epsilon(1e-13));
    const SneCurveSample on_diag = sne_analytic(d, d, 1, 0.0);
    CHECK(on_diag.mu.x1 == on_diag.mu.x2);
}

TEST_CASE("sne_analytic rejects the mixed case") {
    CHECK_THROWS_AS(sne_analytic(0.5, -0.3, 1, 0.0), PreconditionError);
    CHECK_THROWS_AS(sne_analytic(0.5, 0.3, 2, 0.0), PreconditionError);
    CHECK_THROWS_AS(cusp(0.0, 0.3), PreconditionError);
}

TEST_CASE("neutral saddle curve") {
    SUBCASE("mu1 = 0") {
        const auto r = neutral_saddle_curve(d1, d2, 0.0);
        REQUIRE(r.size() == 2);
        CHECK(r[0] == doctest::Approx(-d1 * (d1 + d2)));
        CHECK(std::abs(r[1]) < 1e-15);
    }
    SUBCASE("the diagonal meets it only at the origin") {
        for (double mu : {-0.1, -0.01, 0.01, 0.1}) {
            for (double r : neutral_saddle_curve(d1, d2, mu)) CHECK(std::abs(r - mu) > 1e-6);
        }
    }
    SUBCASE("roots carry an equilibrium with zero trace") {
        const double mu1 = -0.05;
        const auto roots = neutral_saddle_curve(d1, d2, mu1);
        REQUIRE(roots.size() == 2);
        for (double mu2 : roots) {
            CHECK((mu1 - mu2) * (mu1 - mu2) + (d1 + d2) * (d2 * mu1 + d1 * mu2) == doctest::Approx(0.0).epsilon(1e-14));
            const auto eqs = find_equilibria(Field(ReducedBox{mu1, mu2, d1, d2}));
            bool neutral = false;
            for (const auto& e : eqs) neutral |= std::abs(e.tr) < 1e-8;
            CHECK(neutral);
        }
    }
    SUBCASE("no real roots") { CHECK(neutral_saddle_curve(d1, d2, 10.0).empty()); }
}

TEST_CASE("coexisting equilibria on the cusped curve") {
    SUBCASE("symmetric evaluation") {
        const double d = 0.2;
        CHECK(coexisting_equilibria(d, d, 0.0, -1).x1 == doctest::Approx(-1.5 * d));
        CHECK(coexisting_equilibria(d, d, 0.0, 1).x1 == doctest::Approx(0.5 * d));
    }
    for (double theta : {-0.8, -0.3, 0.4, 0.9}) {
        const SneCurveSample s = sne_analytic(d1, d2, 1, theta);
        const Field f(ReducedBox{s.mu.x1, s.mu.x2, d1, d2});
        const Vec2 saddle = coexisting_equilibria(d1, d2, theta, 1);
        const Vec2 sink = coexisting_equilibria(d1, d2, theta, -1);
        CHECK(norm(f(saddle)) < 1e-12);
        CHECK(norm(f(sink)) < 1e-12);
        CHECK(-saddle.x1 * saddle.x1 - d1 * saddle.x2 == doctest::Approx(s.mu.x1).epsilon(1e-12));
        CHECK(classify_at(f, saddle).kind == EquilibriumKind::saddle);
        CHECK(classify_at(f, sink).kind == EquilibriumKind::sink);
    }
}

TEST_CASE("dmu/dtheta vanishes only at the cusp") {
    const double h = 1e-6;
    auto dmu = [&](int sigma, double th) {
        return (1 / (2 * h)) * (sne_analytic(d1, d2, sigma, th + h).mu - sne_analytic(d1, d2, sigma, th - h).mu);
    };
    const double tc = cusp(d1, d2).theta_c;
    for (double th = -2; th <= 2; th += 0.01) {
        const Vec2 outer = dmu(-1, th);
        CHECK(outer.x1 < 0.0);
        CHECK(outer.x2 > 0.0);
        if (std::abs(th - tc) > 0.02) CHECK(norm(dmu(1, th)) > 1e-4);
    }
    CHECK(norm(dmu(1, tc)) < 1e-8);
}

TEST_CASE("property: swapping the coordinates maps samples to samples") {
    auto g = test::rng(21);
    for (int k = 0; k < 200; ++k) {
        const double a = test::uniform(g, 0.01, 1), b = test::uniform(g, 0.01, 1), th = test::uniform(g, -2, 2);
        const int sigma = k % 2 ? 1 : -1;
        const SneCurveSample s = sne_analytic(a, b, sigma, th);
        const SneCurveSample t = sne_analytic(b, a, sigma, -th);
        CHECK(s.mu.x1 == doctest::Approx(t.mu.x2).epsilon(1e-14));
        CHECK(s.mu.x2 == doctest::Approx(t.mu.x1).epsilon(1e-14));
        CHECK(s.x.x1 == doctest::Approx(t.x.x2).epsilon(1e-14));
        CHECK(s.x.x2 == doctest::Approx(t.x.x1).epsilon(1e-14));
    }
}

TEST_CASE("continuation reproduces the cusped curve through the cusp") {
    const double tc = cusp(d1, d2).theta_c;
    const CurveBranch b = continue_from(tc + 0.5, 1, 4000, -1.0);
    REQUIRE(b.points.size() > 50);
    double theta_min = 1e9, theta_max = -1e9;
    for (const auto& p : b.points) {
        const double th = 0.5 * std::log(p.x.x1 / p.x.x2);
        theta_min = std::min(theta_min, th);
        theta_max = std::max(theta_max, th);
        const SneCurveSample a = sne_analytic(d1, d2, 1, th);
        CHECK(norm(a.mu - p.mu) < 1e-8);
        CHECK(p.residual < 1e-10);
        const Equilibrium e = classify_at(Field(ReducedBox{p.mu.x1, p.mu.x2, d1, d2}), p.x);
        CHECK(e.kind == EquilibriumKind::saddle_node);
    }
    CHECK(theta_min < tc - 0.5);
    CHECK(theta_max >= tc + 0.5 - 1e-9);
    const auto fold = locate_fold_cusp(Family::reduced_box(d1, d2), b);
    REQUIRE(fold.has_value());
    CHECK(norm(fold->mu - cusp(d1, d2).mu) < 1e-4);
}

TEST_CASE("continued outer curve moves from lower right to upper left") {
    const CurveBranch b = continue_from(-1.0, -1, 600);
    REQUIRE(b.points.size() > 20);
    for (std::size_t i = 1; i < b.points.size(); ++i) {
        CHECK(b.points[i].mu.x1 < b.points[i - 1].mu.x1);
        CHECK(b.points[i].mu.x2 > b.points[i - 1].mu.x2);
    }
}

TEST_CASE("continued points separate regions with different equilibrium counts") {
    const Family fam = Family::reduced_box(d1, d2);
    const CurveBranch b = continue_from(-1.0, -1, 300);
    for (std::size_t i = 5; i < b.points.size(); i += 25) {
        const BranchPoint& p = b.points[i];
        const Vec2 t = p.dmu();
        const Vec2 n = (1e-4 / norm(t)) * Vec2{-t.x2, t.x1};
        const auto a = find_equilibria(fam.at(p.mu.x1 + n.x1, p.mu.x2 + n.x2)).size();
        const auto c = find_equilibria(fam.at(p.mu.x1 - n.x1, p.mu.x2 - n.x2)).size();
        CHECK(std::max(a, c) - std::min(a, c) == 2);
    }
}

TEST_CASE("continuation of the explicit family stays near the uncoupled locus") {
    const double e1 = 0.05, e2 = 0.03;
    const Family fam = Family::explicit_family(e1, e2);
    const auto seed = refine_sne_seed(fam, {{0.0, 1.0}, {-e1 * std::sin(1.0) / 2, 0.5 * (std::cos(1.0) - 1)}});
    REQUIRE(seed.has_value());
    ContinuationOptions opts;
    opts.n_steps = 300;
    opts.mu_bound = 0.5;
    const CurveBranch b = continue_sne(fam, *seed, opts);
    REQUIRE(b.points.size() > 20);
    for (const auto& p : b.points) {
        CHECK(std::min(std::abs(p.mu.x1), std::abs(p.mu.x2)) <= std::max(e1, e2));
        CHECK(classify_at(fam.at(p.mu.x1, p.mu.x2), p.x).kind == EquilibriumKind::saddle_node);
    }
}

TEST_CASE("continuation rejects seeds off the curve") {
    CHECK_THROWS_AS(continue_sne(Family::reduced_box(d1, d2), {{0.3, 0.3}, {0.0, 0.0}}), PreconditionError);
}

TEST_CASE("curve CSV output") {
    std::ostringstream out;
    write_samples_csv(out, sample_sne(d1, d2, 1, -1, 1, 3));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "theta,sigma,mu1,mu2,x1,x2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}
