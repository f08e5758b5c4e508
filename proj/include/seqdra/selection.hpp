#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "seqdra/graph.hpp"

namespace seqdra {

struct Candidate {
    NodeId node = -1;
    double score = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Strict "is preferred to": higher score, then lower node id.
inline bool ranks_above(const Candidate& a, const Candidate& b) {
    return a.score > b.score || (a.score == b.score && a.node < b.node);
}

/// One warm-started sequential selection round.
struct WsspInstance {
    std::size_t budget = 0;
    std::vector<Candidate> preselection;  ///< holders at round start (at most `budget`)
    std::vector<Candidate> candidates;    ///< in arrival order, disjoint from preselection

    /// Throws std::invalid_argument on an oversized preselection or overlap.
    void validate() const;
};

struct Decisions {
    std::vector<std::uint8_t> accepted;  ///< one flag per candidate, arrival order
    std::vector<Candidate> holders;      ///< allocation at the end of the round
    std::size_t evictions = 0;
};

/// Count of pool entries <= s (ties counted).
std::size_t rank(double s, std::span<const double> pool);

/// The b best of preselection and candidates, best first.
std::vector<Candidate> offline_select(const WsspInstance& inst);

Decisions run_hiring_above_mean(const WsspInstance& inst);
Decisions run_hiring_above_median(const WsspInstance& inst);

/// Cutoff-based cost minimization: reject the first `cutoff` candidates, then
/// accept candidates that beat the current reference threshold.
Decisions run_ccm(const WsspInstance& inst, std::size_t cutoff);

/// Gives any resources still free at the end of the sequence to the latest
/// unaccepted candidates, last arrival first.
void assign_leftovers(const WsspInstance& inst, Decisions& d);

/// Offline score minus achieved score.
double compute_cost(const WsspInstance& inst, std::span<const Candidate> holders);

/// Mean normalized rank of the selected scores within the round's pool
/// (preselection and candidates), clamped to [0.01, 0.99].
double compute_quality(const WsspInstance& inst, std::span<const Candidate> selected);
inline constexpr double kInitialQuality = 0.5;

/// Half the L1 distance between two allocations: mismatched placements.
std::size_t allocation_mismatch(std::span<const Candidate> a, std::span<const Candidate> b);

/// Optimal cutoffs c*(b, n, q) estimated by Monte Carlo.
class CutoffTable {
public:
    struct Cell {
        std::size_t budget = 0;
        std::size_t n = 0;
        double q_bucket = 0.0;
        std::size_t c_star = 0;
        double est_cost = 0.0;
        std::size_t replicas = 0;
        std::uint64_t seed = 0;
    };

    static const std::vector<double>& default_q_grid();

    void insert(const Cell& c);
    [[nodiscard]] bool empty() const noexcept { return cells_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }

    /// Nearest q bucket and nearest tabulated n for this budget; result < n.
    [[nodiscard]] std::size_t lookup(std::size_t budget, std::size_t n, double q) const;
    [[nodiscard]] const Cell& cell(std::size_t budget, std::size_t n, double q) const;

    void write_csv(std::ostream& out) const;
    static CutoffTable read_csv(std::istream& in);

    [[nodiscard]] std::vector<Cell> cells() const;

private:
    // key: (budget, n, q bucket in hundredths)
    std::map<std::tuple<std::size_t, std::size_t, int>, Cell> cells_;
};

struct CutoffTableOptions {
    std::size_t budget = 5;
    std::vector<std::size_t> n_grid;
    std::vector<double> q_grid = CutoffTable::default_q_grid();
    std::size_t replicas = 2000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    double preselection_halfwidth = 0.05;
};

/// Expected rank-based cost (per resource) of CCM for every cutoff 0..n-1
/// at preselection quality q. Common random instances across cutoffs.
std::vector<double> ccm_cost_curve(std::size_t budget, std::size_t n, double q,
                                   std::size_t replicas, std::uint64_t seed,
                                   double halfwidth = 0.05);

/// Index of the minimum of the 3-point moving average of `curve`.
std::size_t smoothed_argmin(std::span<const double> curve);

/// Throws std::invalid_argument when replicas < 1000.
CutoffTable build_cutoff_table(const CutoffTableOptions& opt);

}  // namespace seqdra
