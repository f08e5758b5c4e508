#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace seqdra {

/// Coarse-grained SIS parameters: the graph enters only through its mean degree.
struct MomentParams {
    double beta = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    double budget = 0.0;
    double mean_degree = 0.0;
    double nodes = 0.0;
};

enum class Closure { normal, lognormal, deterministic };

Closure parse_closure(std::string_view name);
std::string_view to_string(Closure c);

struct MomentState {
    double m1 = 0.0;  ///< E[N^I]
    double m2 = 0.0;  ///< E[(N^I)^2]
};

/// Below this fraction of N the lognormal closure is replaced by the normal one.
inline constexpr double kLognormalGuard = 1e-6;

/// Third moment in terms of the first two. Lognormal throws
/// std::domain_error when m1 is at or below the guard.
double closed_third_moment(const MomentState& s, Closure c, double nodes);

/// First- and second-moment derivatives with the selected closure. The
/// deterministic closure sets m2 = m1^2 and returns d(m1^2)/dt for m2.
MomentState moment_rhs(const MomentParams& p, const MomentState& s, Closure c);

struct MomentTrajectory {
    Closure closure = Closure::deterministic;
    std::vector<double> t;
    std::vector<double> m1;
    std::vector<double> m2;
};

/// Adaptive Dormand-Prince integration sampled every `output_dt` on [0, T].
/// m1 is kept in [0, N]; once it reaches 0 the state stays extinct.
/// Throws std::runtime_error if the step size underflows.
MomentTrajectory integrate_moments(const MomentParams& p, MomentState s0, Closure c, double horizon,
                                   double output_dt, double tolerance = 1e-8);

/// Trajectory CSV: t,m1,m2,closure.
void write_trajectory_csv(const MomentTrajectory& tr, std::ostream& out);

}  // namespace seqdra
