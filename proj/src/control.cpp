#include "seqdra/control.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace seqdra {

void SamplerConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
}

std::size_t SamplerConfig::sample_size(std::size_t infected) const {
    // The small epsilon keeps exact products such as 0.05 * 600 = 30 from flooring to 29.
    return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(infected) + 1e-9));
}

StrategyConfig StrategyConfig::parse(std::string_view label) {
    StrategyConfig s;
    if (label == "DRA") {
        s.family = Family::dra;
        return s;
    }
    if (label == "RDRA") {
        s.family = Family::rdra;
        return s;
    }
    constexpr std::string_view prefix = "SDRA-";
    if (label.substr(0, prefix.size()) != prefix)
        throw std::invalid_argument(fmt::format("unknown strategy '{}'", label));
    s.family = Family::sdra;
    const auto rest = label.substr(prefix.size());
    if (rest == "MEAN") {
        s.algo = OnlineAlgo::mean;
    } else if (rest == "MEDIAN") {
        s.algo = OnlineAlgo::median;
    } else if (rest == "CCM*") {
        s.algo = OnlineAlgo::ccm;
        s.cutoff_rule = CutoffRule::table;
    } else if (rest == "CCM-sqrt") {
        s.algo = OnlineAlgo::ccm;
        s.cutoff_rule = CutoffRule::sqrt_n;
    } else if (rest == "CCM-e") {
        s.algo = OnlineAlgo::ccm;
        s.cutoff_rule = CutoffRule::n_over_e;
    } else if (rest.substr(0, 4) == "CCM-") {
        s.algo = OnlineAlgo::ccm;
        s.cutoff_rule = CutoffRule::fixed;
        const auto num = rest.substr(4);
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), s.cutoff);
        if (ec != std::errc{} || ptr != num.data() + num.size())
            throw std::invalid_argument(fmt::format("bad cutoff in strategy '{}'", label));
    } else {
        throw std::invalid_argument(fmt::format("unknown strategy '{}'", label));
    }
    return s;
}

std::string StrategyConfig::label() const {
    switch (family) {
        case Family::dra: return "DRA";
        case Family::rdra: return "RDRA";
        case Family::sdra: break;
    }
    switch (algo) {
        case OnlineAlgo::mean: return "SDRA-MEAN";
        case OnlineAlgo::median: return "SDRA-MEDIAN";
        case OnlineAlgo::ccm:
            switch (cutoff_rule) {
                case CutoffRule::table: return "SDRA-CCM*";
                case CutoffRule::sqrt_n: return "SDRA-CCM-sqrt";
                case CutoffRule::n_over_e: return "SDRA-CCM-e";
                case CutoffRule::fixed: return fmt::format("SDRA-CCM-{}", cutoff);
            }
            break;
        case OnlineAlgo::none: break;
    }
    return "SDRA-?";
}

void StrategyConfig::validate() const {
    if ((family == Family::sdra) != (algo != OnlineAlgo::none))
        throw std::invalid_argument("online algorithm is set iff the family is SDRA");
}

std::size_t resolve_cutoff(const StrategyConfig& s, std::size_t budget, std::size_t n, double quality,
                           const CutoffTable* table) {
    if (n == 0) return 0;
    std::size_t c = 0;
    switch (s.cutoff_rule) {
        case CutoffRule::table:
            if (!table) throw std::invalid_argument("CCM* requires a cutoff table");
            c = table->lookup(budget, n, quality);
            break;
        case CutoffRule::sqrt_n: {
            const double v = std::sqrt(static_cast<double>(n)) - 1.0;
            c = v <= 0.0 ? 0 : static_cast<std::size_t>(std::lround(v));
            break;
        }
        case CutoffRule::n_over_e:
            c = static_cast<std::size_t>(std::floor(static_cast<double>(n) / std::numbers::e));
            break;
        case CutoffRule::fixed: c = s.cutoff; break;
    }
    return std::min(c, n - 1);
}

WarmStart warm_start(const EpidemicState& s, std::size_t budget, Scorer& scorer) {
    WarmStart w;
    for (NodeId i : s.treated_nodes()) w.preselection.push_back({i, scorer(s, i)});
    w.free_resources = budget > w.preselection.size() ? budget - w.preselection.size() : 0;
    return w;
}

std::vector<NodeId> draw_sample(const EpidemicState& s, const SamplerConfig& cfg,
                                std::span<const double> scores, Rng& rng) {
    std::vector<NodeId> pool;
    for (NodeId i : s.infected_nodes())
        if (!s.is_treated(i)) pool.push_back(i);
    const std::size_t n = std::min(cfg.sample_size(s.infected_count()), pool.size());
    if (n == 0) return {};
    if (cfg.mode == SamplingMode::uniform) {
        // Partial Fisher-Yates: first n slots are a uniform n-subset.
        for (std::size_t k = 0; k < n; ++k) {
            const auto j = k + rng.below(pool.size() - k);
            std::swap(pool[k], pool[j]);
        }
        pool.resize(n);
        return pool;
    }
    // Softmax weights e^{S_i}, sequential draws without replacement.
    double top = -std::numeric_limits<double>::infinity();
    for (NodeId i : pool) top = std::max(top, scores[i]);
    std::vector<double> w(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) w[k] = std::exp(scores[pool[k]] - top);
    std::vector<NodeId> out;
    out.reserve(n);
    for (std::size_t draw = 0; draw < n; ++draw) {
        double total = 0.0;
        for (double x : w) total += x;
        double target = rng.uniform() * total;
        std::size_t pick = pool.size() - 1;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (w[k] <= 0.0) continue;
            if (target < w[k]) {
                pick = k;
                break;
            }
            target -= w[k];
        }
        while (w[pick] <= 0.0) --pick;  // round-off landed past the last live entry
        out.push_back(pool[pick]);
        w[pick] = 0.0;
    }
    return out;
}

void apply_allocation(EpidemicState& s, std::span<const Candidate> next) {
    std::vector<std::uint8_t> keep(s.node_count(), 0);
    for (const auto& c : next) keep[c.node] = 1;
    for (NodeId i : s.treated_nodes())
        if (!keep[i]) s.untreat(i);
    for (const auto& c : next)
        if (!s.is_treated(c.node)) s.treat(c.node);
}

namespace {

RoundStats base_stats(const EpidemicState& s, const WsspInstance& inst) {
    RoundStats st;
    st.round = s.round_index();
    st.time = s.time();
    st.infected = s.infected_count();
    st.sample_size = inst.candidates.size();
    st.preselection_size = inst.preselection.size();
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : inst.candidates) m = std::min(m, c.score);
    st.min_candidate_score = inst.candidates.empty() ? 0.0 : m;
    return st;
}

}  // namespace

RoundStats run_rdra_round(EpidemicState& s, const WsspInstance& inst) {
    RoundStats st = base_stats(s, inst);
    const auto chosen = offline_select(inst);
    st.quality_out = compute_quality(inst, chosen);
    apply_allocation(s, chosen);
    return st;
}

RoundStats run_sdra_round(EpidemicState& s, const WsspInstance& inst, const StrategyConfig& strategy,
                          double quality, const CutoffTable* table) {
    RoundStats st = base_stats(s, inst);
    st.quality_in = quality;
    Decisions d;
    switch (strategy.algo) {
        case OnlineAlgo::mean: d = run_hiring_above_mean(inst); break;
        case OnlineAlgo::median: d = run_hiring_above_median(inst); break;
        case OnlineAlgo::ccm:
            st.cutoff = resolve_cutoff(strategy, inst.budget, inst.candidates.size(), quality, table);
            d = run_ccm(inst, st.cutoff);
            break;
        case OnlineAlgo::none: throw std::invalid_argument("SDRA round without an online algorithm");
    }
    assign_leftovers(inst, d);
    const auto offline = offline_select(inst);
    st.epsilon = allocation_mismatch(d.holders, offline);
    st.cost = compute_cost(inst, d.holders);
    st.evictions = d.evictions;
    st.quality_out = inst.candidates.empty() ? quality : compute_quality(inst, d.holders);
    apply_allocation(s, d.holders);
    return st;
}

Scorer make_scorer(const RunContext& ctx, ScorerKind kind, const Rng& parent) {
    switch (kind) {
        case ScorerKind::rand: return Scorer::rand(parent.stream("scorer"));
        case ScorerKind::lrie: return Scorer::lrie();
        case ScorerKind::lrsr:
            if (!ctx.lrsr) throw std::invalid_argument("LRSR scorer requires an LRSR table");
            return Scorer::lrsr(ctx.lrsr);
        case ScorerKind::mcm:
            if (!ctx.plan) throw std::invalid_argument("MCM scorer requires a priority plan");
            return Scorer::mcm(ctx.plan);
    }
    throw std::invalid_argument("unknown scorer");
}

namespace {

/// Places free resources on random untreated infected nodes until
/// min(b, N^I) are in use. Returns how many were placed.
std::size_t top_up(EpidemicState& s, std::size_t budget, Rng& rng) {
    const std::size_t want = std::min(budget, s.infected_count());
    if (s.treated_count() >= want) return 0;
    std::vector<NodeId> pool;
    for (NodeId i : s.infected_nodes())
        if (!s.is_treated(i)) pool.push_back(i);
    std::size_t placed = 0;
    while (s.treated_count() < want) {
        const auto k = rng.below(pool.size());
        s.treat(pool[k]);
        pool[k] = pool.back();
        pool.pop_back();
        ++placed;
    }
    return placed;
}

void check_round_invariants(const EpidemicState& s, std::size_t budget) {
    if (s.treated_count() != std::min(budget, s.infected_count()))
        throw std::logic_error("budget invariant violated: treated != min(b, N^I)");
    if (!s.caches_consistent()) throw std::logic_error("epidemic caches out of sync");
}

}  // namespace

RunRecord simulate(const RunContext& ctx, const RunOptions& opt, std::uint64_t seed) {
    if (!ctx.graph) throw std::invalid_argument("simulate: no graph");
    opt.epidemic.validate();
    opt.sampler.validate();
    opt.strategy.validate();
    const Graph& g = *ctx.graph;
    const std::size_t n = g.node_count();
    const std::size_t budget = opt.epidemic.budget;
    const CutoffTable* table = ctx.cutoffs.get();
    if (opt.strategy.needs_cutoff_table() && !table)
        throw std::invalid_argument("CCM* requires a cutoff table");

    const Rng base(seed);
    Rng epi_rng = base.stream("epidemic");
    Rng sample_rng = base.stream("sampling");
    Rng arrival_rng = base.stream("arrival");
    Rng init_rng = base.stream("init");
    Scorer scorer = make_scorer(ctx, opt.scorer, base);

    EpidemicState state(g);
    if (!opt.initial_infected.empty()) {
        state.reset(opt.initial_infected);
    } else if (opt.initial_fraction) {
        std::vector<NodeId> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<NodeId>(i);
        const auto k = static_cast<std::size_t>(std::lround(*opt.initial_fraction * static_cast<double>(n)));
        for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + init_rng.below(n - i)]);
        all.resize(std::min(k, n));
        state.reset(all);
    } else {
        state.infect_all();
    }
    // Initial allocation: uniformly random infected nodes.
    top_up(state, budget, init_rng);

    RunRecord rec;
    rec.node_count = n;
    rec.seed = seed;
    rec.times.push_back(0.0);
    rec.infected.push_back(static_cast<std::uint32_t>(state.infected_count()));

    const bool by_rounds = opt.axis == TimeAxis::rounds;
    const auto max_rounds = by_rounds ? static_cast<std::size_t>(std::llround(opt.horizon))
                                      : std::numeric_limits<std::size_t>::max();
    double quality = kInitialQuality;
    std::vector<double> all_scores;

    while (true) {
        if (state.infected_count() == 0) {
            rec.extinction = state.time();
            break;
        }
        if (rec.rounds.size() >= max_rounds || rec.rounds.size() >= opt.max_events) break;

        // Round: warm start, sample, reallocate. The infection state is frozen.
        WsspInstance inst;
        inst.budget = budget;
        auto ws = warm_start(state, budget, scorer);
        inst.preselection = std::move(ws.preselection);
        std::vector<NodeId> sample;
        if (opt.strategy.family == Family::dra) {
            for (NodeId i : state.infected_nodes())
                if (!state.is_treated(i)) sample.push_back(i);
        } else if (opt.sampler.mode == SamplingMode::softmax) {
            all_scores.assign(n, 0.0);
            for (NodeId i : state.infected_nodes())
                if (!state.is_treated(i)) all_scores[i] = scorer(state, i);
            sample = draw_sample(state, opt.sampler, all_scores, sample_rng);
        } else {
            sample = draw_sample(state, opt.sampler, {}, sample_rng);
        }
        if (opt.strategy.family == Family::sdra) shuffle(sample.begin(), sample.end(), arrival_rng);
        inst.candidates.reserve(sample.size());
        for (NodeId i : sample) {
            const double sc = opt.sampler.mode == SamplingMode::softmax && opt.strategy.family != Family::dra
                                  ? all_scores[i]
                                  : scorer(state, i);
            inst.candidates.push_back({i, sc});
        }

        if (std::find(opt.score_rounds.begin(), opt.score_rounds.end(), rec.rounds.size()) != opt.score_rounds.end())
            rec.score_snapshots.push_back({rec.rounds.size(), inst.preselection, inst.candidates});

        RoundStats st = opt.strategy.family == Family::sdra
                            ? run_sdra_round(state, inst, opt.strategy, quality, table)
                            : run_rdra_round(state, inst);
        quality = st.quality_out;
        st.topped_up = top_up(state, budget, sample_rng);
        if (opt.check_invariants) check_round_invariants(state, budget);
        rec.rounds.push_back(st);
        if (opt.record_allocations) rec.allocations.push_back(state.treated_nodes());

        // Epidemic event.
        EventDraw e;
        try {
            e = sample_next_event(state, opt.epidemic, epi_rng);
        } catch (const AbsorbingState&) {
            break;
        }
        if (!by_rounds && state.time() + e.dt > opt.horizon) {
            state.set_time(opt.horizon);
            break;
        }
        state.apply(e);
        state.advance_round();
        rec.times.push_back(state.time());
        rec.infected.push_back(static_cast<std::uint32_t>(state.infected_count()));
    }
    rec.end_time = state.time();
    return rec;
}

}  // namespace seqdra
