#include "snictorus/transit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "snictorus/integrate.hpp"
#include "snictorus/io.hpp"
#include "snictorus/parallel.hpp"

namespace snic {

namespace {

constexpr double pi = std::numbers::pi;

void require_positive_v2(const Field& f, double eta, double L2) {
    constexpr int n1 = 33;
    constexpr int n2 = 257;
    for (int i = 0; i < n1; ++i) {
        const double x1 = -eta + 2.0 * eta * i / (n1 - 1);
        for (int j = 0; j < n2; ++j) {
            const double x2 = eta + (L2 - 2.0 * eta) * j / (n2 - 1);
            if (!(f({x1, x2}).x2 > 0.0)) throw PreconditionError("transit_numeric: v2 <= 0 on the strip");
        }
    }
}

}  // namespace

TransitResult transit_numeric(const Field& f, double x1_in, double eta, double tol) {
    const double L2 = f.geometry().L2;
    if (!(eta > 0.0) || !(eta < 0.5 * L2)) throw PreconditionError("transit_numeric: need 0 < eta < L2/2");
    if (!(tol > 0.0)) throw PreconditionError("transit_numeric: tol must be positive");
    require_positive_v2(f, eta, L2);

    // State (x1, t) against the independent variable x2.
    auto rhs = [&f](double x2, Vec2 y) {
        const Vec2 v = f({y.x1, x2});
        if (!(v.x2 > 0.0)) throw PreconditionError("transit_numeric: v2 <= 0 along the transit");
        return Vec2{v.x1 / v.x2, 1.0 / v.x2};
    };
    TransitResult r;
    r.x1_in = x1_in;
    const double x2_end = L2 - eta;
    Dopri5<decltype(rhs)> stepper(rhs, eta, {x1_in, 0.0}, stepper_options(tol));
    while (stepper.t() < x2_end) {
        const DenseSegment& seg = stepper.step(x2_end);
        const double mid = std::abs(seg.at(seg.t0 + 0.5 * seg.h).x1);
        if (std::abs(seg.end().x1) > eta || mid > eta) {
            r.escaped = true;
            break;
        }
    }
    r.x1_out = stepper.y().x1;
    r.t2 = stepper.y().x2;
    r.x2_end = stepper.t();
    return r;
}

double transit_closed_form(double x1, double eta) {
    if (!(eta > 0.0)) throw PreconditionError("transit_closed_form: eta must be positive");
    if (x1 < -eta || x1 > eta / 3.0) throw PreconditionError("transit_closed_form: x1 outside [-eta, eta/3]");
    return eta * x1 / (eta - 2.0 * x1);
}

double transit_closed_form_slope(double x1, double eta) {
    if (!(eta > 0.0)) throw PreconditionError("transit_closed_form_slope: eta must be positive");
    if (x1 < -eta || x1 > eta / 3.0) throw PreconditionError("transit_closed_form_slope: x1 outside [-eta, eta/3]");
    const double d = eta - 2.0 * x1;
    return eta * eta / (d * d);
}

double transit_closed_form_inverse(double y, double eta) {
    if (!(eta > 0.0)) throw PreconditionError("transit_closed_form_inverse: eta must be positive");
    if (y < -eta / 3.0 || y > eta) throw PreconditionError("transit_closed_form_inverse: y outside [-eta/3, eta]");
    return eta * y / (eta + 2.0 * y);
}

double transit_time_closed_form(double eta, double L2) {
    if (!(eta > 0.0) || !(eta < 0.5 * L2)) throw PreconditionError("transit_time_closed_form: need 0 < eta < L2/2");
    return (two_pi / L2) / std::tan(pi * eta / L2);
}

double transit_time_closed_form(double eta, double L2, double mu2) {
    if (mu2 == 0.0) return transit_time_closed_form(eta, L2);
    if (!(eta > 0.0) || !(eta < 0.5 * L2)) throw PreconditionError("transit_time_closed_form: need 0 < eta < L2/2");
    const double s0 = 1.0 / std::tan(pi * eta / L2);
    const double a = L2 / pi + pi * mu2 / L2;
    const double b = pi * mu2 / L2;
    if (!(a > 0.0)) throw PreconditionError("transit_time_closed_form: mu2 too negative");
    if (b > 0.0) return 2.0 / std::sqrt(a * b) * std::atan(std::sqrt(b / a) * s0);
    const double z = std::sqrt(-b / a) * s0;
    if (!(z < 1.0)) throw PreconditionError("transit_time_closed_form: v2 vanishes on the strip");
    return 2.0 / std::sqrt(-a * b) * std::atanh(z);
}

// ============================================================================
// Error scan
// ============================================================================

std::string_view to_string(TransitCase c) {
    switch (c) {
        case TransitCase::exact_profile: return "exact_profile";
        case TransitCase::cubic: return "cubic";
        case TransitCase::mu1: return "mu1";
        case TransitCase::mu2: return "mu2";
        case TransitCase::coupling: return "coupling";
    }
    return "?";
}

Field transit_model(TransitCase c, const TransitScanConfig& cfg) {
    const double L2 = cfg.L2;
    const TorusGeometry g(L2, L2);
    Profile v2 = Profile::sine_squared(L2);
    if (c == TransitCase::cubic) v2 = v2.plus_sine_cubed(cfg.alpha, L2);
    ProductSnic base{0.0, 0.0, Profile::quadratic(), v2, g};
    switch (c) {
        case TransitCase::exact_profile:
        case TransitCase::cubic: return Field(base);
        case TransitCase::mu1: base.mu1 = cfg.mu1; return Field(base);
        case TransitCase::mu2: base.mu2 = cfg.mu2; return Field(base);
        case TransitCase::coupling: {
            const double d = cfg.delta;
            const double k = two_pi / L2;
            const double a = L2 / two_pi;
            Coupling cp;
            cp.g1 = [=](double, double x2) { return d * a * std::sin(k * x2); };
            cp.g2 = [=](double x1, double) { return d * x1; };
            cp.grad_g1 = [=](double, double x2) { return Vec2{0.0, d * std::cos(k * x2)}; };
            cp.grad_g2 = [=](double, double) { return Vec2{d, 0.0}; };
            return Field(PerturbedProduct{base, cp, std::abs(d)});
        }
    }
    throw PreconditionError("transit_model: unknown case");
}

const TransitFit* TransitErrorTable::fit(TransitCase c, double eta) const {
    for (const auto& f : fits)
        if (f.kind == c && f.eta == eta) return &f;
    return nullptr;
}

TransitErrorTable transit_error_scan(const TransitScanConfig& cfg, unsigned threads) {
    if (cfg.n_x1 < 2) throw PreconditionError("transit_error_scan: n_x1 must be at least 2");
    if (!(cfg.x1_hi_fraction > -1.0) || cfg.x1_hi_fraction > 1.0 / 3.0)
        throw PreconditionError("transit_error_scan: x1_hi_fraction must lie in (-1, 1/3]");
    struct Job {
        TransitCase kind;
        double eta;
        double x1;
    };
    std::vector<Job> jobs;
    for (TransitCase c : cfg.cases)
        for (double eta : cfg.etas)
            for (int i = 0; i < cfg.n_x1; ++i) {
                const double lo = -eta;
                const double hi = cfg.x1_hi_fraction * eta;
                jobs.push_back({c, eta, lo + (hi - lo) * i / (cfg.n_x1 - 1)});
            }

    TransitErrorTable table;
    table.rows.resize(jobs.size());
    parallel_for(jobs.size(), threads == 0 ? default_threads() : threads, [&](std::size_t i) {
        const Job& j = jobs[i];
        const Field f = transit_model(j.kind, cfg);
        const TransitResult r = transit_numeric(f, j.x1, j.eta, cfg.tol);
        TransitErrorRow& row = table.rows[i];
        row.eta = j.eta;
        row.x1 = j.x1;
        row.kind = j.kind;
        row.numeric = r.x1_out;
        row.closed_form = transit_closed_form(j.x1, j.eta);
        row.err = std::abs(r.x1_out - row.closed_form);
        row.t2 = r.t2;
        row.escaped = r.escaped;
    });

    for (TransitCase c : cfg.cases) {
        for (double eta : cfg.etas) {
            TransitFit fit;
            fit.kind = c;
            fit.eta = eta;
            const double log_eta = std::log(1.0 / eta);
            double sxx = 0, sx = 0, sy = 0, sxy = 0, mm = 0, em = 0;
            int n = 0;
            for (const auto& row : table.rows) {
                if (row.kind != c || row.eta != eta || row.escaped) continue;
                fit.max_err = std::max(fit.max_err, row.err);
                if (row.x1 == 0.0) continue;
                const double m = row.x1 * row.x1 * log_eta;
                mm += m * m;
                em += row.err * m;
                fit.coefficient_max = std::max(fit.coefficient_max, row.err / m);
                if (row.err > 0.0) {
                    const double x = std::log(std::abs(row.x1));
                    const double y = std::log(row.err);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    sxy += x * y;
                    ++n;
                }
            }
            fit.coefficient = mm > 0.0 ? em / mm : 0.0;
            const double den = n * sxx - sx * sx;
            fit.exponent = n >= 2 && den > 0.0 ? (n * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
            table.fits.push_back(fit);
        }
    }
    return table;
}

void write_transit_csv(std::ostream& out, const TransitErrorTable& table) {
    out << "eta,x1,case,numeric,closed_form,err,t2,fitted_exponent,coefficient\n";
    for (const auto& row : table.rows) {
        const TransitFit* fit = table.fit(row.kind, row.eta);
        out << fmt17(row.eta) << ',' << fmt17(row.x1) << ',' << to_string(row.kind) << ',' << fmt17(row.numeric) << ','
            << fmt17(row.closed_form) << ',' << fmt17(row.err) << ',' << fmt17(row.t2) << ','
            << fmt17(fit ? fit->exponent : std::numeric_limits<double>::quiet_NaN()) << ','
            << fmt17(fit ? fit->coefficient : std::numeric_limits<double>::quiet_NaN()) << '\n';
    }
}

}  // namespace snic
