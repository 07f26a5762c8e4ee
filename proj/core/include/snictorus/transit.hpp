#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "snictorus/field.hpp"

namespace snic {

struct TransitResult {
    double x1_in = 0.0;
    double x1_out = 0.0;
    double t2 = 0.0;       ///< time spent between the two lines
    bool escaped = false;  ///< left the strip |x1| <= eta before reaching x2 = L2 - eta
    double x2_end = 0.0;   ///< x2 reached (L2 - eta unless escaped)
};

/// Transit from x2 = eta to x2 = L2 - eta by integrating dx1/dx2 = v1/v2 and dt/dx2 = 1/v2.
/// Throws PreconditionError when v2 <= 0 somewhere on the strip.
TransitResult transit_numeric(const Field& f, double x1_in, double eta, double tol = 1e-12);

/// x1' = eta x1 / (eta - 2 x1) on [-eta, eta/3].
double transit_closed_form(double x1, double eta);
/// d x1' / d x1 = eta^2 / (eta - 2 x1)^2.
double transit_closed_form_slope(double x1, double eta);
/// Inverse on the image [-eta/3, eta]: x1 = eta y / (eta + 2 y).
double transit_closed_form_inverse(double y, double eta);

/// t2 = (2 pi / L2) cot(pi eta / L2) for v2 = (L2/pi)^2 sin^2(pi x2 / L2).
double transit_time_closed_form(double eta, double L2);
/// Exact t2 for v2 + mu2 via sigma = -cot(pi x2 / L2).
double transit_time_closed_form(double eta, double L2, double mu2);

// ============================================================================
// Error scan
// ============================================================================

enum class TransitCase {
    exact_profile,  ///< v1 = x1^2, v2 = (L2/pi)^2 sin^2
    cubic,          ///< v2 deformed by alpha sin^3(pi x2 / L2), mu = delta = 0
    mu1,            ///< exact profile with mu1 added to v1
    mu2,            ///< exact profile with mu2 added to v2
    coupling,       ///< delta (L2 / 2 pi) sin(2 pi x2 / L2) added to v1 and delta x1 to v2
};

std::string_view to_string(TransitCase c);

struct TransitScanConfig {
    std::vector<double> etas{0.02, 0.05, 0.1};
    int n_x1 = 41;                 ///< samples of [-eta, x1_hi_fraction * eta]
    double x1_hi_fraction = 0.25;
    std::vector<TransitCase> cases{TransitCase::cubic};
    double alpha = 1.0;
    double mu1 = 1e-5;
    double mu2 = 1e-6;
    double delta = 1e-5;
    double L2 = two_pi;
    double tol = 1e-12;
};

/// Strip model used for one case of the scan.
Field transit_model(TransitCase c, const TransitScanConfig& cfg);

struct TransitErrorRow {
    double eta = 0.0;
    double x1 = 0.0;
    TransitCase kind = TransitCase::cubic;
    double numeric = 0.0;
    double closed_form = 0.0;
    double err = 0.0;
    double t2 = 0.0;
    bool escaped = false;
};

struct TransitFit {
    TransitCase kind = TransitCase::cubic;
    double eta = 0.0;
    double exponent = 0.0;         ///< least-squares slope of log err against log |x1|
    double coefficient = 0.0;      ///< least-squares c in err = c x1^2 log(1/eta)
    double coefficient_max = 0.0;  ///< max over x1 != 0 of err / (x1^2 log(1/eta))
    double max_err = 0.0;
};

struct TransitErrorTable {
    std::vector<TransitErrorRow> rows;
    std::vector<TransitFit> fits;

    const TransitFit* fit(TransitCase c, double eta) const;
};

TransitErrorTable transit_error_scan(const TransitScanConfig& cfg, unsigned threads = 0);

/// Rows "eta,x1,case,numeric,closed_form,err,t2,fitted_exponent,coefficient".
void write_transit_csv(std::ostream& out, const TransitErrorTable& table);

}  // namespace snic
