#include "seqdra/selection.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "seqdra/rng.hpp"

namespace seqdra {

void WsspInstance::validate() const {
    if (preselection.size() > budget) throw std::invalid_argument("preselection larger than budget");
    std::unordered_set<NodeId> seen;
    for (const auto& c : preselection)
        if (!seen.insert(c.node).second) throw std::invalid_argument("duplicate preselected node");
    for (const auto& c : candidates)
        if (!seen.insert(c.node).second)
            throw std::invalid_argument("candidate repeats a preselected or earlier node");
}

std::size_t rank(double s, std::span<const double> pool) {
    return static_cast<std::size_t>(
        std::count_if(pool.begin(), pool.end(), [s](double v) { return v <= s; }));
}

std::vector<Candidate> offline_select(const WsspInstance& inst) {
    std::vector<Candidate> all(inst.preselection);
    all.insert(all.end(), inst.candidates.begin(), inst.candidates.end());
    const std::size_t k = std::min(inst.budget, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), ranks_above);
    all.resize(k);
    return all;
}

namespace {

class Holders {
public:
    Holders(std::span<const Candidate> initial, std::size_t capacity)
        : items_(initial.begin(), initial.end()), capacity_(capacity) {}

    [[nodiscard]] bool full() const { return items_.size() >= capacity_; }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] const std::vector<Candidate>& items() const { return items_; }

    /// Takes a free slot, else replaces the worst holder. Returns true on eviction.
    bool admit(const Candidate& c) {
        if (capacity_ == 0) return false;
        if (!full()) {
            items_.push_back(c);
            return false;
        }
        auto worst = std::min_element(items_.begin(), items_.end(), ranks_above_rev);
        *worst = c;
        return true;
    }

    [[nodiscard]] double mean() const {
        double s = 0.0;
        for (const auto& c : items_) s += c.score;
        return s / static_cast<double>(items_.size());
    }

    [[nodiscard]] double lower_median() const {
        std::vector<double> v;
        v.reserve(items_.size());
        for (const auto& c : items_) v.push_back(c.score);
        const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
        std::nth_element(v.begin(), mid, v.end());
        return *mid;
    }

private:
    // min_element with this comparator yields the least preferred holder
    static bool ranks_above_rev(const Candidate& a, const Candidate& b) { return ranks_above(b, a); }

    std::vector<Candidate> items_;
    std::size_t capacity_;
};

template <class Threshold>
Decisions run_threshold_rule(const WsspInstance& inst, Threshold threshold) {
    Decisions d;
    d.accepted.assign(inst.candidates.size(), 0);
    Holders h(inst.preselection, inst.budget);
    for (std::size_t j = 0; j < inst.candidates.size(); ++j) {
        const auto& c = inst.candidates[j];
        const bool accept = inst.budget > 0 && (h.empty() || c.score > threshold(h));
        if (!accept) continue;
        d.accepted[j] = 1;
        d.evictions += h.admit(c) ? 1 : 0;
    }
    d.holders = h.items();
    return d;
}

}  // namespace

Decisions run_hiring_above_mean(const WsspInstance& inst) {
    return run_threshold_rule(inst, [](const Holders& h) { return h.mean(); });
}

Decisions run_hiring_above_median(const WsspInstance& inst) {
    return run_threshold_rule(inst, [](const Holders& h) { return h.lower_median(); });
}

Decisions run_ccm(const WsspInstance& inst, std::size_t cutoff) {
    const std::size_t n = inst.candidates.size();
    if (n > 0 && cutoff >= n) throw std::invalid_argument("ccm: cutoff must be < n");
    Decisions d;
    d.accepted.assign(n, 0);
    Holders h(inst.preselection, inst.budget);
    if (inst.budget == 0) {
        d.holders = h.items();
        return d;
    }

    // Reference set: the b best scores among the preselection and the
    // learning phase, ascending. The threshold starts at its worst entry and
    // moves up one entry per acceptance.
    std::vector<double> reference;
    reference.reserve(inst.preselection.size() + cutoff);
    for (const auto& c : inst.preselection) reference.push_back(c.score);
    for (std::size_t j = 0; j < cutoff && j < n; ++j) reference.push_back(inst.candidates[j].score);
    std::sort(reference.begin(), reference.end(), std::greater<>());
    if (reference.size() > inst.budget) reference.resize(inst.budget);
    std::reverse(reference.begin(), reference.end());

    std::size_t pointer = 0;
    for (std::size_t j = cutoff; j < n; ++j) {
        const auto& c = inst.candidates[j];
        bool accept;
        if (reference.empty()) {
            accept = !h.full();  // nothing learned: fill free slots only
        } else if (pointer < reference.size()) {
            accept = c.score > reference[pointer];
        } else {
            accept = false;  // every reference entry has been beaten
        }
        if (!accept) continue;
        d.accepted[j] = 1;
        d.evictions += h.admit(c) ? 1 : 0;
        ++pointer;
    }
    d.holders = h.items();
    return d;
}

void assign_leftovers(const WsspInstance& inst, Decisions& d) {
    for (std::size_t j = inst.candidates.size(); j-- > 0 && d.holders.size() < inst.budget;) {
        if (d.accepted[j]) continue;
        d.accepted[j] = 1;
        d.holders.push_back(inst.candidates[j]);
    }
}

double compute_cost(const WsspInstance& inst, std::span<const Candidate> holders) {
    // Summing only the symmetric difference keeps identical allocations at exactly 0.
    const auto off = offline_select(inst);
    std::unordered_set<NodeId> in_off, in_holders;
    for (const auto& c : off) in_off.insert(c.node);
    for (const auto& c : holders) in_holders.insert(c.node);
    double cost = 0.0;
    for (const auto& c : off)
        if (!in_holders.count(c.node)) cost += c.score;
    for (const auto& c : holders)
        if (!in_off.count(c.node)) cost -= c.score;
    return cost;
}

double compute_quality(const WsspInstance& inst, std::span<const Candidate> selected) {
    if (selected.empty()) return kInitialQuality;
    std::vector<double> pool;
    pool.reserve(inst.preselection.size() + inst.candidates.size());
    for (const auto& c : inst.preselection) pool.push_back(c.score);
    for (const auto& c : inst.candidates) pool.push_back(c.score);
    if (pool.empty()) return kInitialQuality;
    double acc = 0.0;
    for (const auto& c : selected)
        acc += static_cast<double>(rank(c.score, pool)) / static_cast<double>(pool.size());
    return std::clamp(acc / static_cast<double>(selected.size()), 0.01, 0.99);
}

std::size_t allocation_mismatch(std::span<const Candidate> a, std::span<const Candidate> b) {
    std::unordered_set<NodeId> in_b;
    for (const auto& c : b) in_b.insert(c.node);
    std::size_t only_a = 0;
    for (const auto& c : a) only_a += in_b.count(c.node) ? 0 : 1;
    const std::size_t only_b = b.size() - (a.size() - only_a);
    return (only_a + only_b) / 2;
}

// ---------------------------------------------------------------------------
// Cutoff table

const std::vector<double>& CutoffTable::default_q_grid() {
    static const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    return grid;
}

namespace {
int q_key(double q) { return static_cast<int>(std::lround(q * 100.0)); }
}  // namespace

void CutoffTable::insert(const Cell& c) { cells_[{c.budget, c.n, q_key(c.q_bucket)}] = c; }

const CutoffTable::Cell& CutoffTable::cell(std::size_t budget, std::size_t n, double q) const {
    // Nearest n among the cells of this budget, then nearest q bucket.
    const Cell* best = nullptr;
    auto better = [&](const Cell& c) {
        if (!best) return true;
        const auto dn = [&](const Cell& x) {
            return x.n > n ? x.n - n : n - x.n;
        };
        if (dn(c) != dn(*best)) return dn(c) < dn(*best);
        if (c.n != best->n) return c.n < best->n;  // prefer the smaller n: its cutoff stays < n
        return std::abs(c.q_bucket - q) < std::abs(best->q_bucket - q);
    };
    for (const auto& [key, c] : cells_)
        if (c.budget == budget && better(c)) best = &c;
    if (!best) throw std::out_of_range(fmt::format("cutoff table has no entries for b={}", budget));
    return *best;
}

std::size_t CutoffTable::lookup(std::size_t budget, std::size_t n, double q) const {
    if (n == 0) return 0;
    return std::min(cell(budget, n, q).c_star, n - 1);
}

std::vector<CutoffTable::Cell> CutoffTable::cells() const {
    std::vector<Cell> out;
    out.reserve(cells_.size());
    for (const auto& [k, c] : cells_) out.push_back(c);
    return out;
}

void CutoffTable::write_csv(std::ostream& out) const {
    out << "b,n,q_bucket,c_star,est_cost,replicas,seed\n";
    for (const auto& [k, c] : cells_)
        out << fmt::format("{},{},{:.2f},{},{:.6f},{},{}\n", c.budget, c.n, c.q_bucket, c.c_star,
                           c.est_cost, c.replicas, c.seed);
}

CutoffTable CutoffTable::read_csv(std::istream& in) {
    CutoffTable t;
    std::string line;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("b,n,q_bucket,c_star", 0) != 0)
                throw std::runtime_error("cutoff table: unexpected header");
            header = true;
            continue;
        }
        std::istringstream ss(line);
        std::string f[7];
        for (auto& x : f)
            if (!std::getline(ss, x, ','))
                throw std::runtime_error(fmt::format("cutoff table line {}: 7 columns expected", line_no));
        Cell c;
        c.budget = std::stoul(f[0]);
        c.n = std::stoul(f[1]);
        c.q_bucket = std::stod(f[2]);
        c.c_star = std::stoul(f[3]);
        c.est_cost = std::stod(f[4]);
        c.replicas = std::stoul(f[5]);
        c.seed = std::stoull(f[6]);
        t.insert(c);
    }
    return t;
}

std::vector<double> ccm_cost_curve(std::size_t budget, std::size_t n, double q,
                                   std::size_t replicas, std::uint64_t seed, double halfwidth) {
    std::vector<double> total(n, 0.0);
    if (n == 0 || budget == 0) return total;
    Rng rng(seed);
    const std::size_t pool_size = budget + n;
    WsspInstance inst;
    inst.budget = budget;
    inst.preselection.resize(budget);
    inst.candidates.resize(n);
    std::vector<double> scores(pool_size);
    std::vector<std::size_t> ranks(pool_size);
    std::vector<std::size_t> idx(pool_size);
    const double lo = std::max(0.0, q - halfwidth), hi = std::min(1.0, q + halfwidth);
    for (std::size_t r = 0; r < replicas; ++r) {
        for (std::size_t i = 0; i < budget; ++i) {
            scores[i] = rng.uniform(lo, hi);
            inst.preselection[i] = {static_cast<NodeId>(i), scores[i]};
        }
        for (std::size_t j = 0; j < n; ++j) {
            scores[budget + j] = rng.uniform();
            inst.candidates[j] = {static_cast<NodeId>(budget + j), scores[budget + j]};
        }
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        for (std::size_t k = 0; k < pool_size; ++k) ranks[idx[k]] = k + 1;
        std::size_t best = 0;
        for (std::size_t k = 0; k < budget; ++k) best += pool_size - k;
        for (std::size_t c = 0; c < n; ++c) {
            const auto d = run_ccm(inst, c);
            std::size_t got = 0;
            for (const auto& h : d.holders) got += ranks[static_cast<std::size_t>(h.node)];
            total[c] += static_cast<double>(best - got);
        }
    }
    for (double& v : total) v /= static_cast<double>(replicas) * static_cast<double>(budget);
    return total;
}

std::size_t smoothed_argmin(std::span<const double> curve) {
    if (curve.empty()) return 0;
    std::size_t best = 0;
    double best_v = 0.0;
    for (std::size_t c = 0; c < curve.size(); ++c) {
        const std::size_t lo = c == 0 ? 0 : c - 1;
        const std::size_t hi = std::min(curve.size() - 1, c + 1);
        double s = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) s += curve[k];
        s /= static_cast<double>(hi - lo + 1);
        if (c == 0 || s < best_v) {
            best_v = s;
            best = c;
        }
    }
    return best;
}

CutoffTable build_cutoff_table(const CutoffTableOptions& opt) {
    if (opt.replicas < 1000) throw std::invalid_argument("cutoff table needs at least 1000 replicas");
    struct Job {
        std::size_t n;
        double q;
    };
    std::vector<Job> jobs;
    for (std::size_t n : opt.n_grid)
        for (double q : opt.q_grid) jobs.push_back({n, q});
    std::vector<CutoffTable::Cell> cells(jobs.size());

    auto work = [&](std::size_t k) {
        const auto [n, q] = jobs[k];
        const std::uint64_t cell_seed =
            splitmix64(opt.seed ^ splitmix64(opt.budget * 1'000'003ULL + n * 101ULL +
                                             static_cast<std::uint64_t>(q_key(q))));
        const auto curve = ccm_cost_curve(opt.budget, n, q, opt.replicas, cell_seed,
                                          opt.preselection_halfwidth);
        const std::size_t c_star = smoothed_argmin(curve);
        cells[k] = {opt.budget, n, q, c_star, curve.empty() ? 0.0 : curve[c_star], opt.replicas, opt.seed};
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, jobs.size()));
    if (threads == 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k) work(k);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t k = t; k < jobs.size(); k += threads) work(k);
            });
        for (auto& th : pool) th.join();
    }
    CutoffTable table;
    for (const auto& c : cells)
        if (c.n > 0) table.insert(c);
    return table;
}

}  // namespace seqdra
