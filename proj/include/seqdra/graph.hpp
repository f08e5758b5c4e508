#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

namespace seqdra {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected, unweighted simple graph. Immutable once built.
class Graph {
public:
    /// Above this node count the per-node membership sets are not built and
    /// has_edge() falls back to a binary search of the sorted neighbor list.
    static constexpr std::size_t kMembershipSetLimit = 100'000;

    Graph() = default;

    /// Builds from an edge list. Self-loops are dropped and duplicates merged.
    Graph(std::size_t n, std::span<const Edge> edges);

    [[nodiscard]] std::size_t node_count() const noexcept { return adjacency_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edge_count_; }
    [[nodiscard]] std::span<const NodeId> neighbors(NodeId i) const { return adjacency_[i]; }
    [[nodiscard]] std::size_t degree(NodeId i) const { return adjacency_[i].size(); }
    [[nodiscard]] bool has_edge(NodeId i, NodeId j) const;
    [[nodiscard]] double mean_degree() const noexcept;

    /// Edges as (min, max) pairs in lexicographic order.
    [[nodiscard]] std::vector<Edge> edges() const;

    /// Graph with every edge incident to `removed` deleted (node count unchanged).
    [[nodiscard]] Graph without_node(NodeId removed) const;

private:
    std::vector<std::vector<NodeId>> adjacency_;  // sorted ascending
    std::vector<std::unordered_set<NodeId>> membership_;
    std::size_t edge_count_ = 0;
};

/// Barabasi-Albert preferential attachment grown from a connected seed pair.
Graph generate_barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed);

/// Watts-Strogatz ring lattice with m/2 neighbors per side and rewiring probability p.
Graph generate_watts_strogatz(std::size_t n, std::size_t m, double p, std::uint64_t seed);

/// Erdos-Renyi G(n, p).
Graph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Hierarchical stochastic block model.
///
/// `level_sizes` lists the branching factor per level from the top down; the
/// last entry is the size of the lowest-level groups. With sizes {4, 3, 100}
/// there are 4 top groups, each split into 3 groups of 100 nodes (N = 1200).
/// `level_probs` has one entry per level of grouping, ordered from the lowest
/// (within the same smallest group) upward, and must be strictly decreasing:
/// probs[0] applies inside a lowest-level group, probs.back() between
/// different top-level groups.
Graph generate_community(std::span<const std::size_t> level_sizes,
                         std::span<const double> level_probs, std::uint64_t seed);

/// Block index of every node at each hierarchy level (level 0 = lowest groups).
std::vector<std::vector<std::size_t>> community_labels(std::span<const std::size_t> level_sizes);

/// Reads whitespace-separated integer pairs, one edge per line; '#' lines are comments.
/// Node ids are compacted to 0..N-1 in order of first appearance.
Graph load_edge_list(const std::filesystem::path& path);
Graph parse_edge_list(std::istream& in);

/// Writes edges as "i j" lines, sorted by (min, max).
void write_edge_list(const Graph& g, std::ostream& out);

}  // namespace seqdra
