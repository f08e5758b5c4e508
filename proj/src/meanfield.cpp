#include "seqdra/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

namespace seqdra {

Closure parse_closure(std::string_view name) {
    if (name == "normal") return Closure::normal;
    if (name == "lognormal") return Closure::lognormal;
    if (name == "deterministic") return Closure::deterministic;
    throw std::invalid_argument("unknown closure '" + std::string(name) + "'");
}

std::string_view to_string(Closure c) {
    switch (c) {
        case Closure::normal: return "normal";
        case Closure::lognormal: return "lognormal";
        case Closure::deterministic: return "deterministic";
    }
    return "?";
}

double closed_third_moment(const MomentState& s, Closure c, double nodes) {
    switch (c) {
        case Closure::normal: return 3.0 * s.m2 * s.m1 - 2.0 * s.m1 * s.m1 * s.m1;
        case Closure::lognormal: {
            if (s.m1 <= kLognormalGuard * nodes)
                throw std::domain_error("lognormal closure undefined for m1 near 0");
            const double r = s.m2 / s.m1;
            return r * r * r;
        }
        case Closure::deterministic: return s.m1 * s.m1 * s.m1;
    }
    return 0.0;
}

MomentState moment_rhs(const MomentParams& p, const MomentState& s, Closure c) {
    const double bk = p.beta * p.mean_degree;
    const double bkn = bk / p.nodes;
    const double rb = p.rho * p.budget;
    const double m2 = c == Closure::deterministic ? s.m1 * s.m1 : s.m2;
    const double dm1 = (bk - p.delta) * s.m1 - bkn * m2 - rb;
    if (c == Closure::deterministic) return {dm1, 2.0 * s.m1 * dm1};
    const double m3 = closed_third_moment({s.m1, m2}, c, p.nodes);
    const double dm2 = (bk + p.delta - 2.0 * rb) * s.m1 - 2.0 * bkn * m3 +
                       (2.0 * (bk - p.delta) - bkn) * m2 + rb;
    return {dm1, dm2};
}

MomentTrajectory integrate_moments(const MomentParams& p, MomentState s0, Closure c, double horizon,
                                   double output_dt, double tolerance) {
    using namespace boost::numeric::odeint;
    using State = std::array<double, 2>;
    if (!(p.nodes > 0.0)) throw std::invalid_argument("moment integration needs N > 0");
    if (!(output_dt > 0.0)) throw std::invalid_argument("output_dt must be > 0");

    auto rhs = [&](const State& x, State& dx, double) {
        if (x[0] <= 0.0) {
            dx = {0.0, 0.0};
            return;
        }
        const Closure used =
            c == Closure::lognormal && x[0] < kLognormalGuard * p.nodes ? Closure::normal : c;
        const auto d = moment_rhs(p, {x[0], x[1]}, used);
        dx = {d.m1, d.m2};
    };

    MomentTrajectory tr;
    tr.closure = c;
    State x{std::clamp(s0.m1, 0.0, p.nodes), c == Closure::deterministic ? s0.m1 * s0.m1 : s0.m2};
    auto record = [&](double t) {
        tr.t.push_back(t);
        tr.m1.push_back(x[0]);
        tr.m2.push_back(c == Closure::deterministic ? x[0] * x[0] : x[1]);
    };
    record(0.0);
    auto stepper = make_controlled(tolerance, tolerance, runge_kutta_dopri5<State>());
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / output_dt - 1e-9));
    double t = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_next = std::min(horizon, static_cast<double>(k) * output_dt);
        if (x[0] > 0.0) {
            double dt = std::min(output_dt, 1e-3);
            double tt = t;
            std::size_t tries = 0;
            while (tt < t_next) {
                dt = std::min(dt, t_next - tt);
                if (stepper.try_step(rhs, x, tt, dt) == fail) {
                    if (dt < 1e-14 * std::max(1.0, horizon) || ++tries > 100'000)
                        throw std::runtime_error("moment integration: step size underflow");
                }
                if (x[0] <= 0.0) break;
            }
        }
        t = t_next;
        if (x[0] <= 0.0) x = {0.0, 0.0};
        x[0] = std::min(x[0], p.nodes);
        record(t);
    }
    return tr;
}

void write_trajectory_csv(const MomentTrajectory& tr, std::ostream& out) {
    out << "t,m1,m2,closure\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k)
        out << fmt::format("{:.9g},{:.9g},{:.9g},{}\n", tr.t[k], tr.m1[k], tr.m2[k], to_string(tr.closure));
}

}  // namespace seqdra
