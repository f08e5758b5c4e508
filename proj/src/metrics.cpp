#include "seqdra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

namespace seqdra {

namespace {

double state_time(const RunRecord& rec, std::size_t k, TimeAxis axis) {
    return axis == TimeAxis::rounds ? static_cast<double>(k) : rec.times[k];
}

}  // namespace

double auc_infection(const RunRecord& rec, double horizon, TimeAxis axis) {
    if (rec.infected.empty() || rec.node_count == 0) throw std::invalid_argument("auc: empty record");
    double area = 0.0;
    for (std::size_t k = 0; k < rec.infected.size(); ++k) {
        const double start = state_time(rec, k, axis);
        if (start >= horizon) break;
        const double end = k + 1 < rec.infected.size() ? std::min(horizon, state_time(rec, k + 1, axis)) : horizon;
        area += static_cast<double>(rec.infected[k]) * (end - start);
    }
    return area / static_cast<double>(rec.node_count);
}

double infected_fraction_at(const RunRecord& rec, double t, TimeAxis axis) {
    if (rec.infected.empty()) throw std::invalid_argument("empty record");
    std::size_t k = 0;
    if (axis == TimeAxis::rounds) {
        k = std::min(rec.infected.size() - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t))));
    } else {
        auto it = std::upper_bound(rec.times.begin(), rec.times.end(), t);
        k = it == rec.times.begin() ? 0 : static_cast<std::size_t>(it - rec.times.begin()) - 1;
    }
    return static_cast<double>(rec.infected[k]) / static_cast<double>(rec.node_count);
}

std::size_t online_error(std::span<const std::uint8_t> online, std::span<const std::uint8_t> offline) {
    if (online.size() != offline.size()) throw std::invalid_argument("online_error: size mismatch");
    std::size_t l1 = 0;
    for (std::size_t i = 0; i < online.size(); ++i) l1 += online[i] != offline[i] ? 1 : 0;
    return l1 / 2;
}

std::optional<double> extinction_time(const RunRecord& rec) { return rec.extinction; }

double error_auc(const RunRecord& rec, std::size_t budget) {
    if (budget == 0) return 0.0;
    double s = 0.0;
    for (const auto& r : rec.rounds) s += static_cast<double>(r.epsilon);
    return s / static_cast<double>(budget);
}

PairedRun paired_offline_run(const RunContext& ctx, const RunOptions& online, std::uint64_t seed) {
    PairedRun out;
    RunOptions on = online;
    on.record_allocations = true;
    out.online = simulate(ctx, on, seed);
    RunOptions off = on;
    off.strategy = StrategyConfig{};
    off.strategy.family = online.strategy.family == Family::dra ? Family::dra : Family::rdra;
    out.offline = simulate(ctx, off, seed);
    out.epsilon.reserve(out.online.rounds.size());
    for (const auto& r : out.online.rounds) out.epsilon.push_back(r.epsilon);

    const auto& a = out.online.allocations;
    const auto& b = out.offline.allocations;
    std::vector<std::uint8_t> mark(out.online.node_count, 0);
    for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) {
        std::size_t diff = 0;
        if (k < a.size())
            for (NodeId i : a[k]) mark[i] = 1;
        if (k < b.size())
            for (NodeId i : b[k]) diff += mark[i] ? 0 : 1;  // offline-only
        if (k < a.size()) {
            std::size_t shared = 0;
            if (k < b.size())
                for (NodeId i : b[k]) shared += mark[i];
            diff += a[k].size() - shared;  // online-only
            for (NodeId i : a[k]) mark[i] = 0;
        }
        out.trajectory_epsilon.push_back(static_cast<double>(diff) / 2.0);
    }
    if (!online.record_allocations) {
        out.online.allocations.clear();
        out.offline.allocations.clear();
    }
    return out;
}

double trajectory_error_auc(const PairedRun& run, std::size_t budget) {
    if (budget == 0) return 0.0;
    return std::accumulate(run.trajectory_epsilon.begin(), run.trajectory_epsilon.end(), 0.0) /
           static_cast<double>(budget);
}

RegressionFit fit_regression(std::span<const RegressionPoint> points, double alpha) {
    if (points.size() < 3) throw std::invalid_argument("regression needs at least 3 points");
    RegressionFit fit;
    fit.alpha = alpha;
    fit.points.assign(points.begin(), points.end());
    const auto n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.error_auc;
        my += p.infected_gap;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        sxx += (p.error_auc - mx) * (p.error_auc - mx);
        sxy += (p.error_auc - mx) * (p.infected_gap - my);
        syy += (p.infected_gap - my) * (p.infected_gap - my);
    }
    if (sxx <= 1e-12 * std::max(1.0, mx * mx)) {
        fit.degenerate = true;
        fit.c1 = 0.0;
        fit.c2 = my;
        fit.r2 = 0.0;
        return fit;
    }
    fit.c1 = sxy / sxx;
    fit.c2 = my - fit.c1 * mx;
    const double sse = std::max(0.0, syy - fit.c1 * sxy);
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.slope_se = points.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return fit;
}

bool error_bound_holds(const RegressionFit& fit, double m_k, double infected_gap, double tolerance) {
    return infected_gap <= fit.c1 * m_k + fit.c2 + tolerance;
}

SampleStats summarize(std::span<const double> xs) {
    SampleStats s;
    s.n = xs.size();
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return s;
}

PairedTest paired_test(std::span<const double> a, std::span<const double> b, double level) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired_test: need equal sizes >= 2");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const auto s = summarize(d);
    PairedTest t;
    t.mean_diff = s.mean;
    t.se = s.se;
    boost::math::students_t dist(static_cast<double>(a.size() - 1));
    t.critical = boost::math::quantile(dist, 0.5 + level / 2.0);
    if (s.se > 0.0) {
        t.t = s.mean / s.se;
        t.significant = std::abs(t.t) > t.critical;
    } else {
        t.t = 0.0;
        t.significant = s.mean != 0.0;
    }
    return t;
}

std::vector<double> mean_curve(std::span<const RunRecord> runs, double horizon, std::size_t points,
                               TimeAxis axis) {
    std::vector<double> out(points, 0.0);
    if (runs.empty() || points == 0) return out;
    for (const auto& r : runs)
        for (std::size_t k = 0; k < points; ++k) {
            const double t = points == 1 ? 0.0 : horizon * static_cast<double>(k) / static_cast<double>(points - 1);
            out[k] += infected_fraction_at(r, t, axis);
        }
    for (double& v : out) v /= static_cast<double>(runs.size());
    return out;
}

void write_run_csv(const RunRecord& rec, std::ostream& out) {
    out << "t,n_infected,round,epsilon,cost,quality\n";
    for (std::size_t k = 0; k < rec.infected.size(); ++k) {
        if (k < rec.rounds.size()) {
            const auto& r = rec.rounds[k];
            out << fmt::format("{:.9g},{},{},{},{:.9g},{:.6f}\n", rec.times[k], rec.infected[k], r.round,
                               r.epsilon, r.cost, r.quality_in);
        } else {
            out << fmt::format("{:.9g},{},,,,\n", rec.times[k], rec.infected[k]);
        }
    }
}

void write_regression_csv(const RegressionFit& fit, std::ostream& out) {
    out << "strategy,A_e,A_dN,c1,c2,r2,alpha\n";
    for (const auto& p : fit.points)
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", p.strategy, p.error_auc,
                           p.infected_gap, fit.c1, fit.c2, fit.r2, fit.alpha);
}

}  // namespace seqdra
