#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqdra/control.hpp"

namespace seqdra {

/// Integral of N^I_t / N over [0, T] for the recorded step trajectory.
/// On the rounds axis state k occupies [k, k+1). The last state extends flat
/// to T. Throws std::invalid_argument on an empty record.
double auc_infection(const RunRecord& rec, double horizon, TimeAxis axis = TimeAxis::clock);

/// Step-function value N^I_t / N at time t.
double infected_fraction_at(const RunRecord& rec, double t, TimeAxis axis = TimeAxis::clock);

/// Half the L1 distance of two 0/1 allocation vectors.
std::size_t online_error(std::span<const std::uint8_t> online, std::span<const std::uint8_t> offline);

std::optional<double> extinction_time(const RunRecord& rec);

/// Sum over rounds of epsilon_k / b.
double error_auc(const RunRecord& rec, std::size_t budget);

struct PairedRun {
    RunRecord online;
    RunRecord offline;
    std::vector<std::size_t> epsilon;  ///< per online round, against the offline choice on the same inputs
    /// Per round index, half the L1 distance between the online allocation and
    /// the offline run's allocation after the same round (empty once a run ended).
    std::vector<double> trajectory_epsilon;
};

/// Online strategy and its RDRA counterpart on identical random streams.
PairedRun paired_offline_run(const RunContext& ctx, const RunOptions& online, std::uint64_t seed);

/// Sum over round indices of trajectory_epsilon / b.
double trajectory_error_auc(const PairedRun& run, std::size_t budget);

/// Which error enters the regression abscissa.
enum class ErrorMeasure { trajectory, shadow };

struct RegressionPoint {
    std::string strategy;
    double error_auc = 0.0;     ///< A_e: mean over seeds of sum_k eps_k / b
    double infected_gap = 0.0;  ///< A_dN: mean over seeds of AUC(online) - AUC(offline)
};

struct RegressionFit {
    double c1 = 0.0;  ///< slope
    double c2 = 0.0;  ///< intercept
    double r2 = 0.0;
    double slope_se = 0.0;
    double alpha = 1.0;
    bool degenerate = false;  ///< fewer than two distinct x values
    std::vector<RegressionPoint> points;
};

/// Ordinary least squares of infected_gap on error_auc.
/// Throws std::invalid_argument with fewer than 3 points.
RegressionFit fit_regression(std::span<const RegressionPoint> points, double alpha = 1.0);

/// A_dN <= c1 * M_K + c2 + tolerance.
bool error_bound_holds(const RegressionFit& fit, double m_k, double infected_gap, double tolerance);

struct SampleStats {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};
SampleStats summarize(std::span<const double> xs);

/// Two-sided paired t-test of a - b.
struct PairedTest {
    double mean_diff = 0.0;
    double se = 0.0;
    double t = 0.0;
    double critical = 0.0;
    bool significant = false;
};
PairedTest paired_test(std::span<const double> a, std::span<const double> b, double level = 0.95);

/// Mean infected fraction over runs on a uniform grid of `points` over [0, T].
std::vector<double> mean_curve(std::span<const RunRecord> runs, double horizon, std::size_t points,
                               TimeAxis axis = TimeAxis::clock);

/// RunRecord CSV: t,n_infected,round,epsilon,cost,quality (one row per state).
void write_run_csv(const RunRecord& rec, std::ostream& out);
/// RegressionFit CSV: strategy,A_e,A_dN,c1,c2,r2,alpha (one row per point).
void write_regression_csv(const RegressionFit& fit, std::ostream& out);

}  // namespace seqdra
