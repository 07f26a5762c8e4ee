#include "snictorus/integrate.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <ostream>

#include "snictorus/io.hpp"

namespace snic {

Vec2 Trajectory::at(double t) const {
    if (segments_.empty()) return p0_;
    if (t <= t0_) return p0_;
    if (t >= t_end()) return end();
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const DenseSegment& s) { return v < s.t1(); });
    if (it == segments_.end()) return end();
    return it->at(t);
}

std::vector<Sample> Trajectory::samples() const {
    std::vector<Sample> out;
    out.reserve(segments_.size() + 1);
    out.push_back({t0_, p0_});
    for (const auto& s : segments_) out.push_back({s.t1(), s.end()});
    return out;
}

std::vector<Sample> Trajectory::resample(std::size_t n) const {
    std::vector<Sample> out;
    if (n == 0) return out;
    out.reserve(n + 1);
    const double a = t_begin();
    const double b = t_end();
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
        out.push_back({t, at(t)});
    }
    return out;
}

void Trajectory::write_csv(std::ostream& out, bool header) const {
    if (header) out << "t,x1,x2\n";
    for (const auto& s : samples()) out << fmt17(s.t) << ',' << fmt17(s.p.x1) << ',' << fmt17(s.p.x2) << '\n';
}

Trajectory integrate(const Field& f, Vec2 p0, double t_end, double tol) {
    if (!(tol > 0.0)) throw PreconditionError("integrate: tol must be positive");
    Trajectory traj(0.0, p0);
    if (!(t_end > 0.0)) return traj;
    const Vec2 v0 = f(p0);
    if (v0.x1 == 0.0 && v0.x2 == 0.0) {
        // An exact equilibrium never moves; record a single constant segment.
        traj.append(DenseSegment{0.0, t_end, p0, {}, {}, {}, {}});
        return traj;
    }
    drive(f, p0, t_end, stepper_options(tol), [&](const DenseSegment& s) {
        traj.append(s);
        return true;
    });
    return traj;
}

std::optional<double> find_crossing(const DenseSegment& seg, const LinearSection& section) {
    const double g0 = section(seg.start());
    const double g1 = section(seg.end());
    if (g0 == 0.0) return std::nullopt;
    const bool up = g0 < 0.0 && g1 >= 0.0;
    const bool down = g0 > 0.0 && g1 <= 0.0;
    if (!((up && section.direction >= 0) || (down && section.direction <= 0))) return std::nullopt;
    if (g1 == 0.0) return seg.t1();
    auto g = [&](double t) { return section(seg.at(t)); };
    boost::uintmax_t iters = 200;
    boost::math::tools::eps_tolerance<double> stop(52);
    const auto r = boost::math::tools::toms748_solve(g, seg.t0, seg.t1(), g0, g1, stop, iters);
    return 0.5 * (r.first + r.second);
}

SectionResult integrate_to_section(const Field& f, Vec2 p0, const LinearSection& section, double tol,
                                   double t_budget) {
    SectionResult result;
    drive(f, p0, t_budget, stepper_options(tol), [&](const DenseSegment& s) {
        if (auto t = find_crossing(s, section)) {
            result.status = SectionStatus::crossed;
            result.time = *t;
            result.point = s.at(*t);
            return false;
        }
        result.point = s.end();
        result.time = s.t1();
        return true;
    });
    return result;
}

std::vector<Sample> section_crossings(const Field& f, Vec2 p0, const LinearSection& section, std::size_t n,
                                      double tol, double t_budget) {
    std::vector<Sample> out;
    if (n == 0) return out;
    drive(f, p0, t_budget, stepper_options(tol), [&](const DenseSegment& s) {
        if (auto t = find_crossing(s, section)) out.push_back({*t, s.at(*t)});
        return out.size() < n;
    });
    return out;
}

}  // namespace snic
