#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>

#include "snictorus/errors.hpp"
#include "snictorus/geometry.hpp"

namespace snic {

struct StepperOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_initial = 0.0;  ///< 0 selects the step automatically
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
};

/// One accepted step with its continuous extension (Dormand-Prince order-4 interpolant).
struct DenseSegment {
    double t0{};
    double h{};
    Vec2 r1, r2, r3, r4, r5;

    double t1() const { return t0 + h; }
    Vec2 start() const { return r1; }
    Vec2 end() const { return r1 + r2; }

    Vec2 at(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

/// Explicit Dormand-Prince 5(4) stepper with FSAL and dense output for planar systems.
/// The right-hand side is either rhs(Vec2) or rhs(double t, Vec2).
template <class Rhs>
class Dopri5 {
public:
    Dopri5(Rhs rhs, double t0, Vec2 y0, StepperOptions opts = {})
        : rhs_(std::move(rhs)), opts_(opts), t_(t0), y_(y0) {
        if (!(opts_.rtol > 0.0) || !(opts_.atol > 0.0)) throw PreconditionError("Dopri5: tolerances must be positive");
        k1_ = eval(t_, y_);
        if (!finite(y_) || !finite(k1_)) throw StiffnessError("non-finite initial state or velocity", t_, y_);
        h_ = opts_.h_initial > 0.0 ? opts_.h_initial : initial_step();
    }

    double t() const { return t_; }
    Vec2 y() const { return y_; }
    Vec2 velocity() const { return k1_; }
    std::size_t accepted() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }
    const DenseSegment& last() const { return seg_; }

    /// Takes one accepted step without passing t_limit.
    const DenseSegment& step(double t_limit = std::numeric_limits<double>::infinity()) {
        if (!(t_limit > t_)) throw PreconditionError("Dopri5::step: limit not ahead of current time");
        bool last_rejected = false;
        for (;;) {
            if (accepted_ + rejected_ >= opts_.max_steps)
                throw StiffnessError("step limit exceeded", t_, y_);
            double h = std::min(h_, opts_.h_max);
            bool clipped = false;
            if (t_ + h >= t_limit) {
                h = t_limit - t_;
                clipped = true;
            }
            const double h_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
            if (h < h_floor && !clipped)
                throw StiffnessError("step size underflow at t=" + std::to_string(t_), t_, y_);

            const Vec2 k2 = eval(t_ + c2 * h, y_ + h * (a21 * k1_));
            const Vec2 k3 = eval(t_ + c3 * h, y_ + h * (a31 * k1_ + a32 * k2));
            const Vec2 k4 = eval(t_ + c4 * h, y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3));
            const Vec2 k5 = eval(t_ + c5 * h, y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4));
            const Vec2 k6 = eval(t_ + h, y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vec2 y1 = y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            const Vec2 k7 = eval(t_ + h, y1);

            const Vec2 e = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double err = error_norm(e, y_, y1);

            if (!std::isfinite(err) || err > 1.0) {
                ++rejected_;
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
                h_ = h * fac;
                last_rejected = true;
                continue;
            }

            seg_.t0 = t_;
            seg_.h = h;
            seg_.r1 = y_;
            seg_.r2 = y1 - y_;
            seg_.r3 = h * k1_ - seg_.r2;
            seg_.r4 = seg_.r2 - h * k7 - seg_.r3;
            seg_.r5 = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            t_ = clipped ? t_limit : t_ + h;
            y_ = y1;
            k1_ = k7;
            ++accepted_;

            double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            if (!clipped || fac < 1.0) h_ = h * fac;
            return seg_;
        }
    }

private:
    Vec2 eval(double t, Vec2 y) {
        if constexpr (std::is_invocable_v<Rhs&, double, Vec2>) {
            return rhs_(t, y);
        } else {
            (void)t;
            return rhs_(y);
        }
    }

    static bool finite(Vec2 v) { return std::isfinite(v.x1) && std::isfinite(v.x2); }

    double error_norm(Vec2 e, Vec2 y0, Vec2 y1) const {
        const double s1 = opts_.atol + opts_.rtol * std::max(std::abs(y0.x1), std::abs(y1.x1));
        const double s2 = opts_.atol + opts_.rtol * std::max(std::abs(y0.x2), std::abs(y1.x2));
        const double q1 = e.x1 / s1;
        const double q2 = e.x2 / s2;
        return std::sqrt(0.5 * (q1 * q1 + q2 * q2));
    }

    double initial_step() {
        const double s1 = opts_.atol + opts_.rtol * std::abs(y_.x1);
        const double s2 = opts_.atol + opts_.rtol * std::abs(y_.x2);
        auto nrm = [&](Vec2 v) { return std::sqrt(0.5 * ((v.x1 / s1) * (v.x1 / s1) + (v.x2 / s2) * (v.x2 / s2))); };
        const double d0 = nrm(y_);
        const double d1n = nrm(k1_);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, opts_.h_max);
        const Vec2 f1 = eval(t_ + h0, y_ + h0 * k1_);
        const double d2 = nrm(f1 - k1_) / h0;
        const double m = std::max(d1n, d2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, 1e-3 * h0) : std::pow(0.01 / m, 0.2);
        return std::min({100.0 * h0, h1, opts_.h_max});
    }

    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                            a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    Rhs rhs_;
    StepperOptions opts_;
    double t_;
    Vec2 y_;
    Vec2 k1_;
    double h_ = 0.0;
    DenseSegment seg_{};
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

}  // namespace snic
