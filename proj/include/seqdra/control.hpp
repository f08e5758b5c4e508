#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqdra/epidemic.hpp"
#include "seqdra/graph.hpp"
#include "seqdra/rng.hpp"
#include "seqdra/scoring.hpp"
#include "seqdra/selection.hpp"

namespace seqdra {

enum class SamplingMode { uniform, softmax };

/// Sample size n_k = floor(alpha * N^I), drawn among untreated infected nodes.
struct SamplerConfig {
    double alpha = 1.0;
    SamplingMode mode = SamplingMode::uniform;

    void validate() const;
    [[nodiscard]] std::size_t sample_size(std::size_t infected) const;
};

enum class Family { dra, rdra, sdra };
enum class OnlineAlgo { none, ccm, mean, median };
enum class CutoffRule { table, sqrt_n, n_over_e, fixed };

struct StrategyConfig {
    Family family = Family::rdra;
    OnlineAlgo algo = OnlineAlgo::none;
    CutoffRule cutoff_rule = CutoffRule::table;
    std::size_t cutoff = 0;  ///< used by CutoffRule::fixed

    /// Parses "DRA", "RDRA", "SDRA-CCM*", "SDRA-CCM-sqrt", "SDRA-CCM-e",
    /// "SDRA-CCM-<c>", "SDRA-MEAN", "SDRA-MEDIAN".
    static StrategyConfig parse(std::string_view label);
    [[nodiscard]] std::string label() const;
    void validate() const;

    [[nodiscard]] bool needs_cutoff_table() const {
        return family == Family::sdra && algo == OnlineAlgo::ccm && cutoff_rule == CutoffRule::table;
    }
};

/// Cutoff for a sample of n candidates; always < n (0 when n == 0).
std::size_t resolve_cutoff(const StrategyConfig& s, std::size_t budget, std::size_t n, double quality,
                           const CutoffTable* table);

/// Always true: the passive trigger opens one round per state change.
constexpr bool trigger_round(const EpidemicState&) noexcept { return true; }

/// Currently treated nodes with their scores, and the number of free resources.
struct WarmStart {
    std::vector<Candidate> preselection;
    std::size_t free_resources = 0;
};
WarmStart warm_start(const EpidemicState& s, std::size_t budget, Scorer& scorer);

/// Draws the round's sample among untreated infected nodes. For softmax mode
/// `scores` must hold a score for every node (entries of other nodes ignored).
std::vector<NodeId> draw_sample(const EpidemicState& s, const SamplerConfig& cfg,
                                std::span<const double> scores, Rng& rng);

/// Outcome of one reallocation round.
struct RoundStats {
    std::size_t round = 0;
    double time = 0.0;
    std::size_t infected = 0;
    std::size_t sample_size = 0;
    std::size_t preselection_size = 0;
    std::size_t cutoff = 0;
    double quality_in = kInitialQuality;  ///< quality used by this round
    double quality_out = kInitialQuality; ///< quality handed to the next round
    std::size_t epsilon = 0;              ///< mismatches against the offline choice
    double cost = 0.0;
    double min_candidate_score = 0.0;
    std::size_t evictions = 0;
    std::size_t topped_up = 0;  ///< resources placed outside the sample to keep min(b, N^I)
};

/// Applies an allocation: untreats holders not in `next`, treats the rest.
void apply_allocation(EpidemicState& s, std::span<const Candidate> next);

/// Batch reallocation: the b best of preselection and sample hold resources.
RoundStats run_rdra_round(EpidemicState& s, const WsspInstance& inst);

/// Sequential reallocation; `inst.candidates` must be in arrival order.
RoundStats run_sdra_round(EpidemicState& s, const WsspInstance& inst, const StrategyConfig& strategy,
                          double quality, const CutoffTable* table);

enum class TimeAxis { clock, rounds };

struct RunOptions {
    EpidemicParams epidemic;
    SamplerConfig sampler;
    StrategyConfig strategy;
    ScorerKind scorer = ScorerKind::lrie;
    TimeAxis axis = TimeAxis::clock;
    double horizon = 10.0;  ///< time units (clock) or rounds (rounds)
    std::size_t max_events = 10'000'000;
    std::optional<double> initial_fraction;  ///< unset: full infection
    std::vector<NodeId> initial_infected;    ///< explicit set, overrides the fraction
    bool check_invariants = false;           ///< verify budget and cache invariants every round
    bool record_allocations = false;         ///< keep the treated set after every round
    std::vector<std::size_t> score_rounds;   ///< rounds whose scored pool is kept
};

/// Scores seen by one round: warm-start holders and sampled candidates.
struct ScoreSnapshot {
    std::size_t round = 0;
    std::vector<Candidate> preselection;
    std::vector<Candidate> candidates;
};

/// Per-run trajectory and round statistics.
struct RunRecord {
    std::vector<double> times;          ///< state start times, strictly increasing after t=0
    std::vector<std::uint32_t> infected;  ///< N^I of each recorded state
    std::vector<RoundStats> rounds;     ///< rounds[k] ran at state k
    std::size_t node_count = 0;
    std::optional<double> extinction;
    double end_time = 0.0;  ///< clock time at which the run stopped
    std::uint64_t seed = 0;
    std::string config_digest;
    std::vector<std::vector<NodeId>> allocations;  ///< per round, when requested
    std::vector<ScoreSnapshot> score_snapshots;
};

/// Shared, immutable inputs of a run.
struct RunContext {
    const Graph* graph = nullptr;
    std::shared_ptr<const PriorityPlan> plan;      ///< required for MCM
    std::shared_ptr<const LrsrTable> lrsr;          ///< required for LRSR
    std::shared_ptr<const CutoffTable> cutoffs;     ///< required for CCM*
};

/// Algorithm 1 loop: rounds interleaved with epidemic events.
RunRecord simulate(const RunContext& ctx, const RunOptions& opt, std::uint64_t seed);

Scorer make_scorer(const RunContext& ctx, ScorerKind kind, const Rng& parent);

}  // namespace seqdra
