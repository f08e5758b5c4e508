#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "seqdra/epidemic.hpp"
#include "seqdra/graph.hpp"
#include "seqdra/rng.hpp"

namespace seqdra {

enum class ScorerKind { rand, lrie, lrsr, mcm };

ScorerKind parse_scorer_kind(std::string_view name);
std::string_view to_string(ScorerKind k);

/// A priority order over nodes: `order[0]` is treated first.
struct PriorityPlan {
    std::vector<NodeId> order;
    std::size_t maxcut = 0;

    /// 1-based position of each node in the plan.
    [[nodiscard]] std::vector<std::size_t> positions() const;
};

/// Largest number of edges crossing any boundary between consecutive plan
/// positions. Throws std::invalid_argument unless `order` is a permutation.
std::size_t compute_maxcut(const Graph& g, std::span<const NodeId> order);

struct PlanOptions {
    std::size_t iterations = 200'000;
    std::uint64_t seed = 1;
    std::size_t max_block = 16;  ///< longest single-node relocation distance
};

/// Cutwidth-minimizing order: best of the identity, BFS and spectral seed
/// orders, refined by simulated annealing. Never worse than its best seed.
PriorityPlan optimize_plan(const Graph& g, const PlanOptions& opt);

/// Seed orders, exposed for tests.
std::vector<NodeId> bfs_order(const Graph& g);
std::vector<NodeId> spectral_order(const Graph& g);

void write_plan(const PriorityPlan& plan, std::ostream& out);
PriorityPlan read_plan(std::istream& in);

/// Number of healthy neighbors minus number of infected neighbors.
double score_lrie(const Graph& g, const EpidemicState& s, NodeId i);

/// N + 1 - position, so the head of the plan scores N.
double score_mcm(std::span<const std::size_t> positions, NodeId i);

/// Largest adjacency eigenvalue, by power iteration on A + I.
/// `skip` excludes one node (its row and column are treated as zero).
struct SpectralRadius {
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};
SpectralRadius spectral_radius(const Graph& g, std::optional<NodeId> skip = std::nullopt,
                               double rel_tol = 1e-8, std::size_t max_iter = 10'000);

/// Eigenvalue drop caused by deleting node i. Falls back to the degree when
/// power iteration does not converge.
double score_lrsr(const Graph& g, NodeId i);

/// LRSR score of every node. The score does not depend on the infection
/// state, so runs on the same graph can share one table.
struct LrsrTable {
    std::vector<double> scores;
    std::size_t fallbacks = 0;
};
LrsrTable lrsr_table(const Graph& g);

/// Criticality scoring owned by one simulation run.
class Scorer {
public:
    static Scorer rand(Rng rng);
    static Scorer lrie();
    static Scorer lrsr(std::shared_ptr<const LrsrTable> table);
    static Scorer mcm(std::shared_ptr<const PriorityPlan> plan);

    [[nodiscard]] ScorerKind kind() const noexcept { return kind_; }

    /// Score of node i in the current state. RAND consumes one draw per call.
    double operator()(const EpidemicState& s, NodeId i);

private:
    explicit Scorer(ScorerKind k) : kind_(k) {}

    ScorerKind kind_;
    Rng rng_;
    std::shared_ptr<const PriorityPlan> plan_;
    std::vector<std::size_t> positions_;
    std::shared_ptr<const LrsrTable> lrsr_;
};

}  // namespace seqdra
