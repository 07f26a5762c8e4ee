#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "snictorus/dopri5.hpp"
#include "snictorus/field.hpp"

namespace snic {

struct Sample {
    double t{};
    Vec2 p;
};

/// Orbit on the universal cover stored as the integrator's dense segments.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(double t0, Vec2 p0) : t0_(t0), p0_(p0) {}

    void append(const DenseSegment& s) { segments_.push_back(s); }

    double t_begin() const { return t0_; }
    double t_end() const { return segments_.empty() ? t0_ : segments_.back().t1(); }
    Vec2 start() const { return p0_; }
    Vec2 end() const { return segments_.empty() ? p0_ : segments_.back().end(); }
    const std::vector<DenseSegment>& segments() const { return segments_; }

    /// Dense-output evaluation; t is clamped to the stored interval.
    Vec2 at(double t) const;
    /// Step end points, starting with the initial point.
    std::vector<Sample> samples() const;
    /// n+1 equally spaced samples over the stored interval.
    std::vector<Sample> resample(std::size_t n) const;

    /// Rows "t,x1,x2" with 17 significant digits.
    void write_csv(std::ostream& out, bool header = true) const;

private:
    double t0_ = 0.0;
    Vec2 p0_;
    std::vector<DenseSegment> segments_;
};

inline StepperOptions stepper_options(double tol) {
    StepperOptions o;
    o.rtol = tol;
    o.atol = tol;
    return o;
}

/// Integrates on the cover over [0, t_end]. Throws StiffnessError on step underflow.
Trajectory integrate(const Field& f, Vec2 p0, double t_end, double tol = 1e-10);

/// Runs the stepper from p0 and hands every accepted segment to observe(seg), which
/// returns false to stop. Returns the time reached.
template <class Observer>
double drive(const Field& f, Vec2 p0, double t_end, const StepperOptions& opts, Observer&& observe) {
    auto rhs = [&f](Vec2 p) { return f(p); };
    Dopri5<decltype(rhs)> stepper(rhs, 0.0, p0, opts);
    while (stepper.t() < t_end) {
        const DenseSegment& seg = stepper.step(t_end);
        if (!observe(seg)) break;
    }
    return stepper.t();
}

/// Zero set of a1 x1 + a2 x2 - c. direction > 0 accepts crossings where the function
/// increases, < 0 where it decreases, 0 either.
struct LinearSection {
    double a1{};
    double a2{};
    double c{};
    int direction = 0;

    double operator()(Vec2 p) const { return a1 * p.x1 + a2 * p.x2 - c; }

    static LinearSection x1_equals(double c, int dir = 0) { return {1.0, 0.0, c, dir}; }
    static LinearSection x2_equals(double c, int dir = 0) { return {0.0, 1.0, c, dir}; }
    /// x1/L1 + x2/L2 = c.
    static LinearSection diagonal(const TorusGeometry& g, double c = 0.0, int dir = 0) {
        return {1.0 / g.L1, 1.0 / g.L2, c, dir};
    }
};

/// Time of the first admissible crossing of the section inside the segment.
/// Crossings at the segment's start point are ignored.
std::optional<double> find_crossing(const DenseSegment& seg, const LinearSection& section);

enum class SectionStatus { crossed, budget_exceeded };

struct SectionResult {
    SectionStatus status = SectionStatus::budget_exceeded;
    Vec2 point;
    double time = 0.0;
    bool crossed() const { return status == SectionStatus::crossed; }
};

/// Integrates until the section is crossed with the requested sign, or until t_budget.
SectionResult integrate_to_section(const Field& f, Vec2 p0, const LinearSection& section, double tol = 1e-10,
                                   double t_budget = 1e4);

/// Successive admissible crossings of a section, up to n of them or t_budget.
std::vector<Sample> section_crossings(const Field& f, Vec2 p0, const LinearSection& section, std::size_t n,
                                      double tol = 1e-10, double t_budget = 1e5);

}  // namespace snic
