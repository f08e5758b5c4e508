#include "seqdra/epidemic.hpp"

#include <algorithm>

namespace seqdra {

void EpidemicParams::validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
}

EpidemicState::EpidemicState(const Graph& g)
    : graph_(&g),
      infected_(g.node_count(), 0),
      treated_(g.node_count(), 0),
      pressure_(g.node_count(), 0) {}

void EpidemicState::reset(std::span<const NodeId> infected) {
    std::fill(infected_.begin(), infected_.end(), 0);
    std::fill(treated_.begin(), treated_.end(), 0);
    std::fill(pressure_.begin(), pressure_.end(), 0);
    infected_count_ = treated_count_ = 0;
    infectious_edges_ = 0;
    time_ = 0.0;
    round_ = 0;
    for (NodeId i : infected) {
        if (infected_[i]) continue;
        infected_[i] = 1;
        ++infected_count_;
        for (NodeId j : graph_->neighbors(i)) ++pressure_[j];
    }
    for (std::size_t i = 0; i < infected_.size(); ++i)
        if (!infected_[i]) infectious_edges_ += pressure_[i];
}

void EpidemicState::infect_all() {
    std::vector<NodeId> all(node_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
    reset(all);
}

std::vector<NodeId> EpidemicState::infected_nodes() const {
    std::vector<NodeId> out;
    out.reserve(infected_count_);
    for (std::size_t i = 0; i < infected_.size(); ++i)
        if (infected_[i]) out.push_back(static_cast<NodeId>(i));
    return out;
}

std::vector<NodeId> EpidemicState::treated_nodes() const {
    std::vector<NodeId> out;
    out.reserve(treated_count_);
    for (std::size_t i = 0; i < treated_.size(); ++i)
        if (treated_[i]) out.push_back(static_cast<NodeId>(i));
    return out;
}

void EpidemicState::treat(NodeId i) {
    if (!infected_[i] || treated_[i]) throw std::logic_error("treat: node must be infected and untreated");
    treated_[i] = 1;
    ++treated_count_;
}

void EpidemicState::untreat(NodeId i) {
    if (!treated_[i]) throw std::logic_error("untreat: node holds no resource");
    treated_[i] = 0;
    --treated_count_;
}

void EpidemicState::apply(const EventDraw& e) {
    const NodeId i = e.node;
    const bool infecting = e.kind == EventKind::infection;
    if (infecting == static_cast<bool>(infected_[i]))
        throw std::logic_error("apply: event inconsistent with node state");
    if (infecting) {
        infected_[i] = 1;
        ++infected_count_;
        infectious_edges_ -= pressure_[i];  // i leaves the healthy set
        for (NodeId j : graph_->neighbors(i)) {
            ++pressure_[j];
            if (!infected_[j]) ++infectious_edges_;
        }
    } else {
        if (treated_[i]) untreat(i);
        infected_[i] = 0;
        --infected_count_;
        infectious_edges_ += pressure_[i];
        for (NodeId j : graph_->neighbors(i)) {
            --pressure_[j];
            if (!infected_[j]) --infectious_edges_;
        }
    }
    time_ += e.dt;
}

bool EpidemicState::caches_consistent() const {
    std::size_t count = 0, treated = 0;
    std::uint64_t edges = 0;
    for (std::size_t i = 0; i < infected_.size(); ++i) {
        const auto id = static_cast<NodeId>(i);
        std::uint32_t p = 0;
        for (NodeId j : graph_->neighbors(id)) p += infected_[j];
        if (p != pressure_[i]) return false;
        count += infected_[i];
        treated += treated_[i];
        if (treated_[i] && !infected_[i]) return false;
        if (!infected_[i]) edges += p;
    }
    return count == infected_count_ && treated == treated_count_ && edges == infectious_edges_;
}

double node_rate(const EpidemicState& s, const EpidemicParams& p, NodeId i) {
    if (s.is_infected(i)) return p.delta + (s.is_treated(i) ? p.rho : 0.0);
    return p.beta * static_cast<double>(s.pressure(i));
}

double total_recovery_pressure(const EpidemicState& s, const EpidemicParams& p) {
    return p.delta * static_cast<double>(s.infected_count()) +
           p.rho * static_cast<double>(s.treated_count());
}

double total_infection_pressure(const EpidemicState& s, const EpidemicParams& p) {
    return p.beta * static_cast<double>(s.infectious_edges());
}

EventDraw sample_next_event(const EpidemicState& s, const EpidemicParams& p, Rng& rng) {
    const double inf_rate = total_infection_pressure(s, p);
    const double rec_rate = total_recovery_pressure(s, p);
    const double total = inf_rate + rec_rate;
    if (!(total > 0.0)) throw AbsorbingState();

    EventDraw e;
    e.dt = rng.exponential(total);
    const bool infection = rng.uniform() * total < inf_rate;
    e.kind = infection ? EventKind::infection : EventKind::recovery;

    // Linear scan within the chosen category, on integer weights where possible.
    const std::size_t n = s.node_count();
    NodeId last = -1;
    if (infection) {
        const std::uint64_t target = rng.below(s.infectious_edges());
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<NodeId>(i);
            if (s.is_infected(id) || s.pressure(id) == 0) continue;
            acc += s.pressure(id);
            if (target < acc) {
                e.node = id;
                return e;
            }
        }
    } else {
        const double target = rng.uniform() * rec_rate;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<NodeId>(i);
            if (!s.is_infected(id)) continue;
            const double w = p.delta + (s.is_treated(id) ? p.rho : 0.0);
            if (w <= 0.0) continue;
            last = id;
            acc += w;
            if (target < acc) {
                e.node = id;
                return e;
            }
        }
    }
    e.node = last;  // floating-point round-off at the top of the range
    return e;
}

}  // namespace seqdra
