#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seqdra/graph.hpp"
#include "seqdra/rng.hpp"

namespace seqdra {

struct EpidemicParams {
    double beta = 3.0;    ///< per infectious edge
    double delta = 0.0;   ///< self-recovery
    double rho = 125.0;   ///< extra recovery rate of a treated node
    std::size_t budget = 5;

    void validate() const;
};

enum class EventKind : std::uint8_t { infection, recovery };

struct EventDraw {
    NodeId node = -1;
    EventKind kind = EventKind::infection;
    double dt = 0.0;
};

/// Thrown by sample_next_event when the total transition rate is zero.
class AbsorbingState : public std::runtime_error {
public:
    AbsorbingState() : std::runtime_error("total event rate is zero") {}
};

/// Infection and treatment state of every node, with incrementally
/// maintained rate caches.
///
/// Invariants: treated nodes are infected; `infected_count()` equals the
/// number of set entries in `infected()`; `pressure(i)` is the number of
/// infected neighbors of i.
class EpidemicState {
public:
    explicit EpidemicState(const Graph& g);

    /// Resets to the given infection set with no treatments, t = 0.
    void reset(std::span<const NodeId> infected);
    void infect_all();

    [[nodiscard]] const Graph& graph() const noexcept { return *graph_; }
    [[nodiscard]] std::size_t node_count() const noexcept { return infected_.size(); }
    [[nodiscard]] bool is_infected(NodeId i) const { return infected_[i] != 0; }
    [[nodiscard]] bool is_treated(NodeId i) const { return treated_[i] != 0; }
    [[nodiscard]] std::size_t infected_count() const noexcept { return infected_count_; }
    [[nodiscard]] std::size_t treated_count() const noexcept { return treated_count_; }
    [[nodiscard]] std::uint32_t pressure(NodeId i) const { return pressure_[i]; }
    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] std::size_t round_index() const noexcept { return round_; }
    [[nodiscard]] std::span<const std::uint8_t> infected() const noexcept { return infected_; }
    [[nodiscard]] std::span<const std::uint8_t> treated() const noexcept { return treated_; }

    /// Sum over healthy nodes of their infected-neighbor counts.
    [[nodiscard]] std::uint64_t infectious_edges() const noexcept { return infectious_edges_; }

    std::vector<NodeId> infected_nodes() const;
    std::vector<NodeId> treated_nodes() const;

    /// Places a resource on node i, which must be infected and untreated.
    void treat(NodeId i);
    /// Removes the resource from node i.
    void untreat(NodeId i);

    /// Applies one event: flips the node, advances time, updates caches and
    /// releases the resource of a treated node that recovers.
    void apply(const EventDraw& e);

    void advance_round() noexcept { ++round_; }
    void set_time(double t) noexcept { time_ = t; }

    /// Recomputes every cache from scratch and compares. Test hook.
    [[nodiscard]] bool caches_consistent() const;

private:
    const Graph* graph_;
    std::vector<std::uint8_t> infected_;
    std::vector<std::uint8_t> treated_;
    std::vector<std::uint32_t> pressure_;
    std::size_t infected_count_ = 0;
    std::size_t treated_count_ = 0;
    std::uint64_t infectious_edges_ = 0;
    double time_ = 0.0;
    std::size_t round_ = 0;
};

double node_rate(const EpidemicState& s, const EpidemicParams& p, NodeId i);

/// Sum of (delta + rho * r_i) over infected nodes.
double total_recovery_pressure(const EpidemicState& s, const EpidemicParams& p);

/// beta times the number of (healthy, infected) neighbor pairs.
double total_infection_pressure(const EpidemicState& s, const EpidemicParams& p);

/// Gillespie draw in the fixed order (dt, category, node).
/// Throws AbsorbingState when no transition is possible.
EventDraw sample_next_event(const EpidemicState& s, const EpidemicParams& p, Rng& rng);

}  // namespace seqdra
