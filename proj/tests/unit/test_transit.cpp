#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "../support/oracles.hpp"
#include "snictorus/errors.hpp"
#include "snictorus/transit.hpp"

using namespace snic;

namespace {

Field exact_strip() {
    TransitScanConfig cfg;
    return transit_model(TransitCase::exact_profile, cfg);
}

/// Time to cross the strip, by quadrature of 1 / v2.
double strip_time(double eta, double mu2 = 0.0) {
    return test::quad([mu2](double x) { return 1.0 / (2.0 * (1.0 - std::cos(x)) + mu2); }, eta, two_pi - eta);
}

}  // namespace

TEST_CASE("closed-form transit examples") {
    const double eta = 0.05;
    CHECK(transit_closed_form(0.0, eta) == 0.0);
    CHECK(transit_closed_form(eta / 3, eta) == doctest::Approx(eta).epsilon(1e-15));
    CHECK(transit_closed_form(-eta, eta) == doctest::Approx(-eta / 3).epsilon(1e-15));
    CHECK(transit_closed_form_slope(0.0, eta) == doctest::Approx(1.0));
    CHECK(transit_closed_form_slope(eta / 3, eta) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK_THROWS_AS(transit_closed_form(0.4 * eta, eta), PreconditionError);
    CHECK_THROWS_AS(transit_closed_form(0.0, 0.0), PreconditionError);
}

TEST_CASE("transit time closed form") {
    CHECK(transit_time_closed_form(0.1, two_pi) == doctest::Approx(1.0 / std::tan(0.05)).epsilon(1e-14));
    CHECK(transit_time_closed_form(0.1, two_pi) == doctest::Approx(19.9833).epsilon(5e-6));
    CHECK(transit_time_closed_form(3.1, two_pi) == doctest::Approx(1.0 / std::tan(1.55)).epsilon(1e-12));
    CHECK_THROWS_AS(transit_time_closed_form(std::numbers::pi, two_pi), PreconditionError);
    for (double eta : {0.02, 0.05, 0.1, 0.5}) {
        CHECK(transit_time_closed_form(eta, two_pi) == doctest::Approx(strip_time(eta)).epsilon(1e-10));
        CHECK(transit_time_closed_form(eta, two_pi, 1e-3) == doctest::Approx(strip_time(eta, 1e-3)).epsilon(1e-9));
    }
}

TEST_CASE("numeric transit of the exact profile matches the explicit flow") {
    const Field f = exact_strip();
    for (double eta : {0.02, 0.05, 0.1}) {
        const double t2 = strip_time(eta);
        for (double s : {-1.0, -0.5, 0.0, 0.1, 0.25}) {
            const double x1 = s * eta;
            const TransitResult r = transit_numeric(f, x1, eta);
            REQUIRE_FALSE(r.escaped);
            CHECK(r.t2 == doctest::Approx(t2).epsilon(1e-9));
            CHECK(r.x2_end == doctest::Approx(two_pi - eta).epsilon(1e-12));
            CHECK(r.x1_out == doctest::Approx(x1 / (1 - x1 * t2)).epsilon(1e-9).scale(eta));
        }
    }
}

TEST_CASE("orbits near the blow-up time leave the strip") {
    const double eta = 0.05;
    const TransitResult r = transit_numeric(exact_strip(), 0.45 * eta, eta);
    CHECK(r.escaped);
    CHECK(r.x2_end < two_pi - eta);
}

TEST_CASE("cubic deformation error fits") {
    TransitScanConfig cfg;
    cfg.cases = {TransitCase::cubic};
    const TransitErrorTable t = transit_error_scan(cfg, 2);
    CHECK(t.rows.size() == cfg.etas.size() * static_cast<std::size_t>(cfg.n_x1));
    double cmin = 1e300, cmax = 0.0;
    for (double eta : cfg.etas) {
        const TransitFit* fit = t.fit(TransitCase::cubic, eta);
        REQUIRE(fit != nullptr);
        CHECK(fit->coefficient_max >= fit->coefficient);
        const double t2 = test::quad(
            [&](double x) {
                const double sn = std::sin(x / 2);
                return 1.0 / (4 * sn * sn + cfg.alpha * sn * sn * sn);
            },
            eta, two_pi - eta);
        for (const auto& row : t.rows)
            if (row.eta == eta) CHECK(row.numeric == doctest::Approx(row.x1 / (1 - row.x1 * t2)).epsilon(1e-9).scale(eta));
        cmin = std::min(cmin, fit->coefficient);
        cmax = std::max(cmax, fit->coefficient);
    }
    CHECK(cmin > 0.0);
    CHECK(cmax / cmin < 3.0);
    for (const auto& row : t.rows) CHECK(row.err == doctest::Approx(std::abs(row.numeric - row.closed_form)));
}

TEST_CASE("a constant shift of v1 moves the image by about mu1 t2") {
    TransitScanConfig cfg;
    const Field f = transit_model(TransitCase::mu1, cfg);
    for (double eta : {0.05, 0.1}) {
        const TransitResult r = transit_numeric(f, 0.0, eta);
        CHECK(r.x1_out / cfg.mu1 == doctest::Approx(strip_time(eta)).epsilon(0.05));
    }
}

TEST_CASE("a constant shift of v2 shortens the transit") {
    TransitScanConfig cfg;
    const Field f = transit_model(TransitCase::mu2, cfg);
    const double eta = 0.05;
    const TransitResult r = transit_numeric(f, 0.0, eta);
    CHECK(r.t2 == doctest::Approx(transit_time_closed_form(eta, two_pi, cfg.mu2)).epsilon(1e-9));
    CHECK(r.t2 < transit_time_closed_form(eta, two_pi));
}

TEST_CASE("property: the transit map is monotone with rightward drift") {
    auto g = test::rng(40);
    const Field f = exact_strip();
    for (int k = 0; k < 100; ++k) {
        const double eta = test::uniform(g, 0.01, 0.2);
        const double a = test::uniform(g, -eta, eta / 3), b = test::uniform(g, -eta, eta / 3);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(transit_closed_form(lo, eta) <= transit_closed_form(hi, eta));
        CHECK(transit_closed_form(hi, eta) >= hi);
        CHECK(transit_closed_form_slope(hi, eta) > 0.0);
        if (hi < 0.25 * eta) {
            const TransitResult ra = transit_numeric(f, lo, eta), rb = transit_numeric(f, hi, eta);
            CHECK(ra.x1_out <= rb.x1_out);
            CHECK(rb.x1_out >= hi);
        }
    }
}

TEST_CASE("property: closed-form inverse is a conjugacy") {
    auto g = test::rng(41);
    for (int k = 0; k < 500; ++k) {
        const double eta = test::uniform(g, 1e-3, 1.0);
        const double x = test::uniform(g, -eta, eta / 3);
        CHECK(transit_closed_form_inverse(transit_closed_form(x, eta), eta) ==
              doctest::Approx(x).epsilon(1e-12).scale(eta));
    }
}

TEST_CASE("transit preconditions") {
    TransitScanConfig cfg;
    cfg.mu2 = -0.5;
    CHECK_THROWS_AS(transit_numeric(transit_model(TransitCase::mu2, cfg), 0.0, 0.05), PreconditionError);
    CHECK_THROWS_AS(transit_numeric(exact_strip(), 0.0, 4.0), PreconditionError);
    CHECK_THROWS_AS(transit_numeric(exact_strip(), 0.0, 0.05, 0.0), PreconditionError);
}

TEST_CASE("transit CSV header") {
    TransitScanConfig cfg;
    cfg.etas = {0.05};
    cfg.n_x1 = 5;
    std::ostringstream out;
    write_transit_csv(out, transit_error_scan(cfg, 1));
    const std::string s = out.str();
    CHECK(s.rfind("eta,x1,case,numeric,closed_form,err,t2,fitted_exponent,coefficient\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 6);
}
