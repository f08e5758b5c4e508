#include "seqdra/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace seqdra {

ScorerKind parse_scorer_kind(std::string_view name) {
    if (name == "RAND" || name == "rand") return ScorerKind::rand;
    if (name == "LRIE" || name == "lrie") return ScorerKind::lrie;
    if (name == "LRSR" || name == "lrsr") return ScorerKind::lrsr;
    if (name == "MCM" || name == "mcm") return ScorerKind::mcm;
    throw std::invalid_argument("unknown scorer '" + std::string(name) + "'");
}

std::string_view to_string(ScorerKind k) {
    switch (k) {
        case ScorerKind::rand: return "RAND";
        case ScorerKind::lrie: return "LRIE";
        case ScorerKind::lrsr: return "LRSR";
        case ScorerKind::mcm: return "MCM";
    }
    return "?";
}

namespace {

std::vector<std::size_t> positions_of(std::span<const NodeId> order, std::size_t n) {
    if (order.size() != n) throw std::invalid_argument("order length differs from node count");
    std::vector<std::size_t> pos(n, 0);
    for (std::size_t p = 0; p < order.size(); ++p) {
        const NodeId v = order[p];
        if (v < 0 || static_cast<std::size_t>(v) >= n || pos[v] != 0)
            throw std::invalid_argument("order is not a permutation");
        pos[v] = p + 1;
    }
    return pos;
}

}  // namespace

std::vector<std::size_t> PriorityPlan::positions() const {
    return positions_of(order, order.size());
}

std::size_t compute_maxcut(const Graph& g, std::span<const NodeId> order) {
    const auto pos = positions_of(order, g.node_count());
    std::size_t best = 0;
    long long running = 0;
    for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        const NodeId v = order[p];
        for (NodeId u : g.neighbors(v)) running += pos[u] > p + 1 ? 1 : -1;
        best = std::max(best, static_cast<std::size_t>(running));
    }
    return best;
}

std::vector<NodeId> bfs_order(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<NodeId> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> dist(n);

    auto bfs = [&](NodeId root, std::vector<NodeId>& out, std::vector<char>& mark) {
        std::deque<NodeId> q{root};
        mark[root] = 1;
        dist[root] = 0;
        std::vector<NodeId> nb;
        while (!q.empty()) {
            const NodeId v = q.front();
            q.pop_front();
            out.push_back(v);
            nb.assign(g.neighbors(v).begin(), g.neighbors(v).end());
            std::stable_sort(nb.begin(), nb.end(),
                             [&](NodeId a, NodeId b) { return g.degree(a) < g.degree(b); });
            for (NodeId u : nb) {
                if (mark[u]) continue;
                mark[u] = 1;
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    };

    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        // Pseudo-peripheral root: repeat BFS from the farthest, lowest-degree node.
        NodeId root = static_cast<NodeId>(start);
        std::size_t ecc = 0;
        for (int sweep = 0; sweep < 4; ++sweep) {
            std::vector<char> mark(n, 0);
            std::vector<NodeId> comp;
            bfs(root, comp, mark);
            NodeId far = root;
            for (NodeId v : comp)
                if (dist[v] > dist[far] || (dist[v] == dist[far] && g.degree(v) < g.degree(far)))
                    far = v;
            if (dist[far] <= ecc) break;
            ecc = dist[far];
            root = far;
        }
        bfs(root, order, seen);
    }
    return order;
}

std::vector<NodeId> spectral_order(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (n < 3) return order;
    std::size_t max_deg = 0;
    for (std::size_t i = 0; i < n; ++i) max_deg = std::max(max_deg, g.degree(static_cast<NodeId>(i)));
    // Power iteration on (c I - L) with the constant vector projected out
    // converges to the Fiedler vector.
    const double c = 2.0 * static_cast<double>(max_deg) + 1.0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(1.0 + 2.0 * static_cast<double>(i));
    auto deflate_normalize = [&](std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
        double norm = 0.0;
        for (double& e : v) {
            e -= mean;
            norm += e * e;
        }
        norm = std::sqrt(norm);
        if (norm > 0) for (double& e : v) e /= norm;
    };
    deflate_normalize(x);
    for (int it = 0; it < 3000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<NodeId>(i);
            double lx = static_cast<double>(g.degree(id)) * x[i];
            for (NodeId j : g.neighbors(id)) lx -= x[j];
            y[i] = c * x[i] - lx;
        }
        deflate_normalize(y);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(y[i] - x[i]));
        x.swap(y);
        if (diff < 1e-10) break;
    }
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return x[a] < x[b]; });
    return order;
}

namespace {

/// Cut profile of an order with O(1) max queries and local recomputation.
class CutProfile {
public:
    CutProfile(const Graph& g, std::vector<NodeId> order) : g_(g), order_(std::move(order)) {
        const std::size_t n = order_.size();
        pos_.assign(n, 0);
        for (std::size_t p = 0; p < n; ++p) pos_[order_[p]] = p;
        cut_.assign(n, 0);  // cut_[p]: edges between positions <= p and > p; cut_[n-1] = 0
        hist_.assign(g.edge_count() + 2, 0);
        for (std::size_t p = 0; p < n; ++p) cut_[p] = boundary_value(p, p == 0 ? 0 : cut_[p - 1]);
        for (std::size_t p = 0; p + 1 < n; ++p) ++hist_[cut_[p]];
        max_ = 0;
        for (std::size_t v = 0; v < hist_.size(); ++v)
            if (hist_[v]) max_ = v;
    }

    [[nodiscard]] std::size_t max() const { return max_; }
    [[nodiscard]] std::size_t count_at_max() const { return hist_[max_]; }
    [[nodiscard]] double energy() const {
        return static_cast<double>(max_) +
               static_cast<double>(count_at_max()) / static_cast<double>(order_.size() + 1);
    }
    [[nodiscard]] const std::vector<NodeId>& order() const { return order_; }

    /// Moves the node at position `from` to position `to`, shifting the rest.
    void move(std::size_t from, std::size_t to) {
        if (from == to) return;
        const NodeId v = order_[from];
        if (from < to) {
            for (std::size_t p = from; p < to; ++p) place(p, order_[p + 1]);
        } else {
            for (std::size_t p = from; p > to; --p) place(p, order_[p - 1]);
        }
        place(to, v);
        recompute(std::min(from, to), std::max(from, to));
    }

private:
    void place(std::size_t p, NodeId v) {
        order_[p] = v;
        pos_[v] = p;
    }

    [[nodiscard]] std::size_t boundary_value(std::size_t p, std::size_t prev) const {
        long long c = static_cast<long long>(prev);
        for (NodeId u : g_.neighbors(order_[p])) c += pos_[u] > p ? 1 : -1;
        return static_cast<std::size_t>(c);
    }

    void recompute(std::size_t lo, std::size_t hi) {
        const std::size_t last = order_.size() - 1;
        for (std::size_t p = lo; p <= hi && p < last; ++p) {
            const std::size_t v = boundary_value(p, p == 0 ? 0 : cut_[p - 1]);
            --hist_[cut_[p]];
            ++hist_[v];
            cut_[p] = v;
            if (v > max_) max_ = v;
        }
        while (max_ > 0 && hist_[max_] == 0) --max_;
    }

    const Graph& g_;
    std::vector<NodeId> order_;
    std::vector<std::size_t> pos_;
    std::vector<std::size_t> cut_;
    std::vector<std::size_t> hist_;
    std::size_t max_ = 0;
};

}  // namespace

PriorityPlan optimize_plan(const Graph& g, const PlanOptions& opt) {
    if (opt.iterations == 0) throw std::invalid_argument("optimize_plan: budget must be > 0");
    const std::size_t n = g.node_count();
    std::vector<NodeId> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    if (n < 3) return {identity, compute_maxcut(g, identity)};

    std::vector<std::vector<NodeId>> seeds{identity, bfs_order(g), spectral_order(g)};
    std::size_t best_seed = 0;
    std::vector<std::size_t> seed_cut;
    for (const auto& s : seeds) seed_cut.push_back(compute_maxcut(g, s));
    for (std::size_t k = 1; k < seeds.size(); ++k)
        if (seed_cut[k] < seed_cut[best_seed]) best_seed = k;

    CutProfile prof(g, seeds[best_seed]);
    std::vector<NodeId> best_order = prof.order();
    double best_energy = prof.energy();

    Rng rng(opt.seed);
    const double t0 = 1.0, t1 = 0.02;
    const double cooling = std::pow(t1 / t0, 1.0 / static_cast<double>(opt.iterations));
    double temp = t0;
    const std::size_t span = std::max<std::size_t>(1, std::min(opt.max_block, n - 1));
    for (std::size_t it = 0; it < opt.iterations; ++it, temp *= cooling) {
        const double before = prof.energy();
        std::size_t from, to;
        if (rng.bernoulli(0.5)) {
            from = rng.below(n - 1);  // adjacent transposition
            to = from + 1;
        } else {
            from = rng.below(n);
            const auto dist = 1 + rng.below(span);
            to = rng.bernoulli(0.5) ? std::min(n - 1, from + dist) : (from >= dist ? from - dist : 0);
        }
        if (from == to) continue;
        prof.move(from, to);
        const double delta = prof.energy() - before;
        if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temp)) {
            if (prof.energy() < best_energy) {
                best_energy = prof.energy();
                best_order = prof.order();
            }
        } else {
            prof.move(to, from);
        }
    }
    PriorityPlan plan{std::move(best_order), 0};
    plan.maxcut = compute_maxcut(g, plan.order);
    return plan;
}

void write_plan(const PriorityPlan& plan, std::ostream& out) {
    out << "maxcut=" << plan.maxcut << '\n';
    for (NodeId v : plan.order) out << v << '\n';
}

PriorityPlan read_plan(std::istream& in) {
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    }
    if (line.rfind("maxcut=", 0) != 0)
        throw std::runtime_error("plan file: missing 'maxcut=' header");
    PriorityPlan plan;
    plan.maxcut = std::stoul(line.substr(7));
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        plan.order.push_back(static_cast<NodeId>(std::stol(line)));
    }
    (void)plan.positions();  // validates the permutation
    return plan;
}

double score_lrie(const Graph& g, const EpidemicState& s, NodeId i) {
    return static_cast<double>(g.degree(i)) - 2.0 * static_cast<double>(s.pressure(i));
}

double score_mcm(std::span<const std::size_t> positions, NodeId i) {
    if (i < 0 || static_cast<std::size_t>(i) >= positions.size())
        throw std::out_of_range("score_mcm: node outside plan");
    return static_cast<double>(positions.size() + 1 - positions[i]);
}

SpectralRadius spectral_radius(const Graph& g, std::optional<NodeId> skip, double rel_tol,
                               std::size_t max_iter) {
    const std::size_t n = g.node_count();
    SpectralRadius out;
    if (n == 0) {
        out.converged = true;
        return out;
    }
    const auto skipped = [&](NodeId v) { return skip && *skip == v; };
    std::vector<double> x(n, 1.0), y(n);
    if (skip) x[*skip] = 0.0;
    double norm = 0.0;
    for (double e : x) norm += e * e;
    if (norm == 0.0) {
        out.converged = true;
        return out;
    }
    for (double& e : x) e /= std::sqrt(norm);
    double lambda = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        // y = (A + I) x on the graph with `skip` removed.
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<NodeId>(i);
            if (skipped(id)) {
                y[i] = 0.0;
                continue;
            }
            double acc = x[i];
            for (NodeId j : g.neighbors(id))
                if (!skipped(j)) acc += x[j];
            y[i] = acc;
        }
        double rq = 0.0, ny = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rq += x[i] * y[i];
            ny += y[i] * y[i];
        }
        const double next = rq - 1.0;
        ny = std::sqrt(ny);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
        out.iterations = it;
        if (it > 1 && std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next))) {
            lambda = next;
            out.converged = true;
            break;
        }
        lambda = next;
    }
    out.value = std::max(0.0, lambda);
    return out;
}

double score_lrsr(const Graph& g, NodeId i) {
    const auto full = spectral_radius(g);
    const auto reduced = spectral_radius(g, i);
    if (!full.converged || !reduced.converged) return static_cast<double>(g.degree(i));
    return full.value - reduced.value;
}

LrsrTable lrsr_table(const Graph& g) {
    LrsrTable t;
    const auto full = spectral_radius(g);
    t.scores.resize(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto id = static_cast<NodeId>(i);
        const auto reduced = spectral_radius(g, id);
        if (full.converged && reduced.converged) {
            t.scores[i] = full.value - reduced.value;
        } else {
            t.scores[i] = static_cast<double>(g.degree(id));
            ++t.fallbacks;
        }
    }
    return t;
}

Scorer Scorer::rand(Rng rng) {
    Scorer s(ScorerKind::rand);
    s.rng_ = rng;
    return s;
}

Scorer Scorer::lrie() { return Scorer(ScorerKind::lrie); }

Scorer Scorer::lrsr(std::shared_ptr<const LrsrTable> table) {
    Scorer s(ScorerKind::lrsr);
    s.lrsr_ = std::move(table);
    return s;
}

Scorer Scorer::mcm(std::shared_ptr<const PriorityPlan> plan) {
    Scorer s(ScorerKind::mcm);
    s.positions_ = plan->positions();
    s.plan_ = std::move(plan);
    return s;
}

double Scorer::operator()(const EpidemicState& s, NodeId i) {
    switch (kind_) {
        case ScorerKind::rand: return rng_.uniform();
        case ScorerKind::lrie: return score_lrie(s.graph(), s, i);
        case ScorerKind::lrsr: return lrsr_->scores.at(i);
        case ScorerKind::mcm: return score_mcm(positions_, i);
    }
    return 0.0;
}

}  // namespace seqdra
