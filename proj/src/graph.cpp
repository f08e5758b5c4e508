#include "seqdra/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "seqdra/rng.hpp"

namespace seqdra {

Graph::Graph(std::size_t n, std::span<const Edge> edges) : adjacency_(n) {
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n)
            throw std::out_of_range("edge endpoint outside node range");
        if (a == b) continue;
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    std::size_t degree_sum = 0;
    for (auto& nb : adjacency_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        degree_sum += nb.size();
    }
    edge_count_ = degree_sum / 2;
    if (n <= kMembershipSetLimit) {
        membership_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            membership_[i].insert(adjacency_[i].begin(), adjacency_[i].end());
    }
}

bool Graph::has_edge(NodeId i, NodeId j) const {
    if (!membership_.empty()) return membership_[i].count(j) != 0;
    const auto& nb = adjacency_[i];
    return std::binary_search(nb.begin(), nb.end(), j);
}

double Graph::mean_degree() const noexcept {
    if (adjacency_.empty()) return 0.0;
    return 2.0 * static_cast<double>(edge_count_) / static_cast<double>(adjacency_.size());
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < adjacency_.size(); ++i)
        for (NodeId j : adjacency_[i])
            if (static_cast<NodeId>(i) < j) out.emplace_back(static_cast<NodeId>(i), j);
    return out;
}

Graph Graph::without_node(NodeId removed) const {
    auto e = edges();
    std::erase_if(e, [removed](const Edge& x) { return x.first == removed || x.second == removed; });
    return Graph(node_count(), e);
}

Graph generate_barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (n < 2 || m < 1 || m >= n)
        throw std::invalid_argument("barabasi_albert: need n >= 2 and 1 <= m < n");
    Rng rng(seed);
    std::vector<Edge> edges{{0, 1}};
    // Each node appears once per incident edge end, so a uniform draw from
    // this list is a degree-proportional draw.
    std::vector<NodeId> ends{0, 1};
    std::vector<NodeId> targets;
    for (std::size_t v = 2; v < n; ++v) {
        targets.clear();
        if (m >= v) {
            for (std::size_t u = 0; u < v; ++u) targets.push_back(static_cast<NodeId>(u));
        } else {
            while (targets.size() < m) {
                const NodeId u = ends[rng.below(ends.size())];
                if (std::find(targets.begin(), targets.end(), u) == targets.end())
                    targets.push_back(u);
            }
        }
        for (NodeId u : targets) {
            edges.emplace_back(u, static_cast<NodeId>(v));
            ends.push_back(u);
            ends.push_back(static_cast<NodeId>(v));
        }
    }
    return Graph(n, edges);
}

Graph generate_watts_strogatz(std::size_t n, std::size_t m, double p, std::uint64_t seed) {
    if (m % 2 != 0 || m >= n || !(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("watts_strogatz: need even m < n and p in [0, 1]");
    Rng rng(seed);
    const std::size_t half = m / 2;
    std::vector<std::unordered_set<NodeId>> adj(n);
    auto link = [&](NodeId a, NodeId b) {
        adj[a].insert(b);
        adj[b].insert(a);
    };
    auto unlink = [&](NodeId a, NodeId b) {
        adj[a].erase(b);
        adj[b].erase(a);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 1; d <= half; ++d)
            link(static_cast<NodeId>(i), static_cast<NodeId>((i + d) % n));

    // Ring order: lattice distance d outer, node i inner, clockwise edge (i, i+d).
    for (std::size_t d = 1; d <= half; ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!rng.bernoulli(p)) continue;
            const auto u = static_cast<NodeId>(i);
            const auto old = static_cast<NodeId>((i + d) % n);
            if (!adj[u].count(old)) continue;  // already rewired away by an earlier step
            if (adj[u].size() >= n - 1) continue;  // no free target
            NodeId w;
            do {
                w = static_cast<NodeId>(rng.below(n));
            } while (w == u || adj[u].count(w));
            unlink(u, old);
            link(u, w);
        }
    }
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (NodeId j : adj[i])
            if (static_cast<NodeId>(i) < j) edges.emplace_back(static_cast<NodeId>(i), j);
    std::sort(edges.begin(), edges.end());
    return Graph(n, edges);
}

Graph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("erdos_renyi: p must be in [0, 1]");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return Graph(n, edges);
}

std::vector<std::vector<std::size_t>> community_labels(std::span<const std::size_t> level_sizes) {
    if (level_sizes.empty()) throw std::invalid_argument("community: empty level_sizes");
    const std::size_t n = std::accumulate(level_sizes.begin(), level_sizes.end(), std::size_t{1},
                                          std::multiplies<>());
    const std::size_t levels = level_sizes.size() - 1;
    std::vector<std::vector<std::size_t>> labels(std::max<std::size_t>(levels, 1),
                                                 std::vector<std::size_t>(n));
    // Lowest-level group size is level_sizes.back(); block width grows upward.
    std::size_t width = level_sizes.back();
    for (std::size_t l = 0; l < labels.size(); ++l) {
        for (std::size_t i = 0; i < n; ++i) labels[l][i] = i / width;
        if (l + 1 < labels.size()) width *= level_sizes[levels - 1 - l];
    }
    return labels;
}

Graph generate_community(std::span<const std::size_t> level_sizes,
                         std::span<const double> level_probs, std::uint64_t seed) {
    if (level_sizes.empty() || level_probs.empty())
        throw std::invalid_argument("community: sizes and probabilities required");
    if (std::any_of(level_sizes.begin(), level_sizes.end(), [](std::size_t s) { return s == 0; }))
        throw std::invalid_argument("community: zero group size");
    const std::size_t levels = level_sizes.size();  // grouping levels incl. "whole graph"
    if (level_probs.size() != levels)
        throw std::invalid_argument("community: need one probability per level");
    for (std::size_t l = 0; l < level_probs.size(); ++l) {
        if (!(level_probs[l] >= 0.0 && level_probs[l] <= 1.0))
            throw std::invalid_argument("community: probabilities must be in [0, 1]");
        if (l > 0 && !(level_probs[l] < level_probs[l - 1]))
            throw std::invalid_argument("community: probabilities must strictly decrease upward");
    }
    const auto labels = community_labels(level_sizes);
    const std::size_t n = labels[0].size();
    Rng rng(seed);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Lowest level at which i and j share a block; `levels - 1` if none.
            std::size_t l = 0;
            while (l < labels.size() && labels[l][i] != labels[l][j]) ++l;
            const double p = level_probs[std::min(l, levels - 1)];
            if (rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
    }
    return Graph(n, edges);
}

Graph parse_edge_list(std::istream& in) {
    std::unordered_map<long long, NodeId> ids;
    std::vector<Edge> edges;
    auto intern = [&](long long raw) {
        auto [it, inserted] = ids.try_emplace(raw, static_cast<NodeId>(ids.size()));
        return it->second;
    };
    auto parse_token = [](std::string_view tok, std::size_t line_no) {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                     ": non-integer token '" + std::string(tok) + "'");
        return v;
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!(ss >> a >> b))
            throw std::runtime_error("edge list line " + std::to_string(line_no) + ": expected two ids");
        const NodeId u = intern(parse_token(a, line_no));
        const NodeId v = intern(parse_token(b, line_no));
        edges.emplace_back(u, v);
    }
    return Graph(ids.size(), edges);
}

Graph load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path.string());
    return parse_edge_list(in);
}

void write_edge_list(const Graph& g, std::ostream& out) {
    for (auto [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

}  // namespace seqdra
