#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "seqdra/rng.hpp"
#include "seqdra/selection.hpp"

using namespace seqdra;

namespace {

WsspInstance make(std::size_t b, std::vector<double> pre, std::vector<double> cand) {
    WsspInstance inst;
    inst.budget = b;
    NodeId id = 0;
    for (double s : pre) inst.preselection.push_back({id++, s});
    for (double s : cand) inst.candidates.push_back({id++, s});
    return inst;
}

WsspInstance random_instance(Rng& rng, std::size_t b, std::size_t pre, std::size_t n, double lo = -5.0,
                             double hi = 5.0) {
    std::vector<double> p(pre), c(n);
    for (auto& x : p) x = rng.uniform(lo, hi);
    for (auto& x : c) x = rng.uniform(lo, hi);
    return make(b, p, c);
}

std::set<NodeId> ids(std::span<const Candidate> cs) {
    std::set<NodeId> s;
    for (const auto& c : cs) s.insert(c.node);
    return s;
}

double total(std::span<const Candidate> cs) {
    double s = 0.0;
    for (const auto& c : cs) s += c.score;
    return s;
}

// Best subset of size min(b, pool) by enumerating bitmasks.
double exhaustive_best(const WsspInstance& inst) {
    std::vector<double> pool;
    for (const auto& c : inst.preselection) pool.push_back(c.score);
    for (const auto& c : inst.candidates) pool.push_back(c.score);
    const std::size_t k = std::min(inst.budget, pool.size());
    double best = -1e300;
    for (unsigned mask = 0; mask < (1u << pool.size()); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (mask & (1u << i)) s += pool[i];
        best = std::max(best, s);
    }
    return best;
}

// Straight-line threshold rule: recompute the threshold from scratch for each
// candidate, evict the lowest-scoring holder (lowest id wins among equals
// when choosing whom to keep, so the highest id with the lowest score goes).
std::vector<NodeId> reference_threshold(const WsspInstance& inst, bool median) {
    std::vector<Candidate> h = inst.preselection;
    std::vector<NodeId> accepted;
    for (const auto& c : inst.candidates) {
        bool take;
        if (h.empty()) {
            take = true;
        } else {
            std::vector<double> s;
            for (const auto& x : h) s.push_back(x.score);
            std::sort(s.begin(), s.end());
            double thr;
            if (median) {
                thr = s[(s.size() - 1) / 2];
            } else {
                thr = 0.0;
                for (double v : s) thr += v;
                thr /= static_cast<double>(s.size());
            }
            take = c.score > thr;
        }
        if (!take) continue;
        accepted.push_back(c.node);
        if (h.size() < inst.budget) {
            h.push_back(c);
            continue;
        }
        std::size_t worst = 0;
        for (std::size_t k = 1; k < h.size(); ++k)
            if (h[k].score < h[worst].score || (h[k].score == h[worst].score && h[k].node > h[worst].node)) worst = k;
        h[worst] = c;
    }
    return accepted;
}

std::vector<NodeId> accepted_ids(const WsspInstance& inst, const Decisions& d) {
    std::vector<NodeId> out;
    for (std::size_t j = 0; j < d.accepted.size(); ++j)
        if (d.accepted[j]) out.push_back(inst.candidates[j].node);
    return out;
}

}  // namespace

TEST_CASE("rank counts ties inclusively") {
    const std::vector<double> pool{1, 2, 3};
    CHECK(rank(3, pool) == 3);
    CHECK(rank(0, pool) == 0);
    CHECK(rank(2, pool) == 2);
    Rng rng(1);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> p(1 + rng.below(20));
        for (auto& x : p) x = static_cast<double>(rng.below(6));
        const double s = static_cast<double>(rng.below(7));
        std::size_t expect = 0;
        for (double x : p) expect += x <= s ? 1 : 0;
        CHECK(rank(s, p) == expect);
    }
}

TEST_CASE("offline selection") {
    // preselection {0, -1}; candidates {-1, 1}: keep 0, take 1
    const auto inst = make(2, {0, -1}, {-1, 1});
    const auto off = offline_select(inst);
    CHECK(ids(off) == std::set<NodeId>{0, 3});

    const auto worse = make(3, {5, 6, 7}, {1, 2, 3, 4});
    CHECK(ids(offline_select(worse)) == std::set<NodeId>{0, 1, 2});

    // ties go to the lower node id
    const auto tie = make(1, {}, {2, 2, 2});
    CHECK(offline_select(tie).front().node == 0);

    Rng rng(2);
    for (int t = 0; t < 10000; ++t) {
        const std::size_t b = 1 + rng.below(4);
        const std::size_t pre = rng.below(b + 1);
        const std::size_t n = rng.below(9);
        const auto r = random_instance(rng, b, pre, n);
        REQUIRE(total(offline_select(r)) == doctest::Approx(exhaustive_best(r)));
    }
}

TEST_CASE("hiring above the mean") {
    // Holders {0, -1}: threshold -0.5 rejects -1; 1 is accepted and evicts -1.
    const auto inst = make(2, {0, -1}, {-1, 1});
    const auto d = run_hiring_above_mean(inst);
    CHECK(d.accepted == std::vector<std::uint8_t>{0, 1});
    CHECK(ids(d.holders) == std::set<NodeId>{0, 3});
    CHECK(d.evictions == 1);
    // new threshold is the mean of {0, 1}
    const auto next = make(2, {0, 1}, {0.5, 0.6});
    CHECK(run_hiring_above_mean(next).accepted == std::vector<std::uint8_t>{0, 1});

    const auto low = make(3, {1, 2, 3}, {0, 1, 1.9, 0.5});
    const auto none = run_hiring_above_mean(low);
    CHECK(std::count(none.accepted.begin(), none.accepted.end(), 1) == 0);

    // single candidate better than the worst holder: exactly one swap
    const auto one = run_hiring_above_mean(make(2, {1, 3}, {4}));
    CHECK(one.evictions == 1);
}

TEST_CASE("hiring above the median") {
    CHECK(run_hiring_above_median(make(3, {1, 2, 3}, {2.5})).accepted == std::vector<std::uint8_t>{1});
    CHECK(run_hiring_above_median(make(3, {1, 2, 3}, {1.5})).accepted == std::vector<std::uint8_t>{0});
    // lower median for an even number of holders
    CHECK(run_hiring_above_median(make(4, {1, 2, 3, 4}, {2.5})).accepted == std::vector<std::uint8_t>{1});
}

TEST_CASE("threshold rules match a straight-line reference") {
    Rng rng(3);
    for (int t = 0; t < 3000; ++t) {
        const std::size_t b = 1 + rng.below(5);
        const auto inst = random_instance(rng, b, rng.below(b + 1), rng.below(15));
        CHECK(accepted_ids(inst, run_hiring_above_mean(inst)) == reference_threshold(inst, false));
        CHECK(accepted_ids(inst, run_hiring_above_median(inst)) == reference_threshold(inst, true));
    }
}

TEST_CASE("CCM") {
    SUBCASE("zero cutoff uses the worst preselected score as first threshold") {
        const auto inst = make(2, {0, -1}, {-1, -0.5, 5});
        const auto d = run_ccm(inst, 0);
        CHECK(d.accepted == std::vector<std::uint8_t>{0, 1, 1});
        CHECK(ids(d.holders) == std::set<NodeId>{0, 4});
    }
    SUBCASE("threshold moves up one reference entry per acceptance") {
        // reference {0, 1}: 0.5 beats 0, then 0.9 does not beat 1, 2 does
        const auto inst = make(2, {0, 1}, {0.5, 0.9, 2});
        CHECK(run_ccm(inst, 0).accepted == std::vector<std::uint8_t>{1, 0, 1});
    }
    SUBCASE("learning phase fills the reference set") {
        // b=2, preselection {0, 1}, first candidate 3 is observed only: reference {1, 3}
        const auto inst = make(2, {0, 1}, {3, 2, 4});
        CHECK(run_ccm(inst, 1).accepted == std::vector<std::uint8_t>{0, 1, 1});
        // after one acceptance the threshold is 3, so 2.5 is rejected
        const auto inst2 = make(2, {0, 1}, {3, 2, 2.5});
        CHECK(run_ccm(inst2, 1).accepted == std::vector<std::uint8_t>{0, 1, 0});
    }
    SUBCASE("last-position cutoff") {
        const auto inst = make(2, {0, 1}, {5, 6, 7, -1});
        const auto d = run_ccm(inst, 3);
        CHECK(std::count(d.accepted.begin(), d.accepted.begin() + 3, 1) == 0);
        CHECK(d.accepted[3] == 0);
        CHECK_THROWS(run_ccm(inst, 4));
    }
    SUBCASE("classical secretary limit") {
        const std::size_t n = 100, c = static_cast<std::size_t>(std::floor(n / std::numbers::e));
        Rng rng(4);
        int hits = 0;
        const int trials = 20000;
        for (int t = 0; t < trials; ++t) {
            WsspInstance inst;
            inst.budget = 1;
            std::vector<double> s(n);
            for (std::size_t j = 0; j < n; ++j) s[j] = static_cast<double>(j);
            shuffle(s.begin(), s.end(), rng);
            for (std::size_t j = 0; j < n; ++j) inst.candidates.push_back({static_cast<NodeId>(j), s[j]});
            auto d = run_ccm(inst, c);
            assign_leftovers(inst, d);
            hits += d.holders.size() == 1 && d.holders[0].score == static_cast<double>(n - 1);
        }
        const double p = static_cast<double>(hits) / trials;
        CHECK(p == doctest::Approx(1.0 / std::numbers::e).epsilon(0.05));
    }
}

TEST_CASE("strategy invariants on random instances") {
    Rng rng(5);
    for (int t = 0; t < 5000; ++t) {
        const std::size_t b = 1 + rng.below(6);
        const auto inst = random_instance(rng, b, rng.below(b + 1), rng.below(20));
        REQUIRE_NOTHROW(inst.validate());
        const std::size_t n = inst.candidates.size();
        std::vector<Decisions> all{run_hiring_above_mean(inst), run_hiring_above_median(inst)};
        if (n > 0) all.push_back(run_ccm(inst, rng.below(n)));
        for (auto& d : all) {
            CHECK(d.holders.size() <= b);
            const auto accepts = static_cast<std::size_t>(std::count(d.accepted.begin(), d.accepted.end(), 1));
            // every accept either fills a free slot or evicts one holder
            CHECK(accepts == d.evictions + (d.holders.size() - inst.preselection.size()));
            assign_leftovers(inst, d);
            CHECK(d.holders.size() == std::min(b, inst.preselection.size() + n));
            CHECK(compute_cost(inst, d.holders) >= -1e-12);
            CHECK(compute_cost(inst, d.holders) ==
                  doctest::Approx(total(offline_select(inst)) - total(d.holders)));
        }
    }
}

TEST_CASE("decisions depend only on the revealed prefix") {
    Rng rng(6);
    for (int t = 0; t < 2000; ++t) {
        const std::size_t b = 1 + rng.below(5);
        const auto inst = random_instance(rng, b, rng.below(b + 1), 2 + rng.below(15));
        const std::size_t n = inst.candidates.size();
        const std::size_t cut = rng.below(n);
        const std::size_t keep = cut + 1 + rng.below(n - cut);
        auto prefix = inst;
        prefix.candidates.resize(keep);
        const auto full_mean = run_hiring_above_mean(inst), pre_mean = run_hiring_above_mean(prefix);
        const auto full_med = run_hiring_above_median(inst), pre_med = run_hiring_above_median(prefix);
        const auto full_ccm = run_ccm(inst, cut), pre_ccm = run_ccm(prefix, cut);
        for (std::size_t j = 0; j < keep; ++j) {
            CHECK(full_mean.accepted[j] == pre_mean.accepted[j]);
            CHECK(full_med.accepted[j] == pre_med.accepted[j]);
            CHECK(full_ccm.accepted[j] == pre_ccm.accepted[j]);
        }
    }
}

TEST_CASE("leftover resources go to the last arrivals") {
    const auto inst = make(3, {9}, {1, 2, 3, 4});
    Decisions d;
    d.accepted.assign(4, 0);
    d.holders = inst.preselection;
    assign_leftovers(inst, d);
    CHECK(d.accepted == std::vector<std::uint8_t>{0, 0, 1, 1});
    CHECK(ids(d.holders) == std::set<NodeId>{0, 3, 4});
}

TEST_CASE("cost") {
    // Online ends with {1, 0} where the best pair is {1, 1}: (1 + 1) - (1 + 0) = 1.
    const auto inst = make(2, {0, -1}, {-1, 1, 1});
    const std::vector<Candidate> online{{3, 1.0}, {0, 0.0}};
    CHECK(compute_cost(inst, online) == doctest::Approx(1.0));
    CHECK(compute_cost(inst, offline_select(inst)) == 0.0);
}

TEST_CASE("cost and error") {
    // The selection error splits the cost into swapped pairs: each offline-only
    // node outscores each online-only node, so
    // cost >= eps * (min offline-only score - max online-only score) >= 0.
    Rng rng(7);
    for (int t = 0; t < 5000; ++t) {
        const std::size_t b = 1 + rng.below(5);
        const auto inst = random_instance(rng, b, rng.below(b + 1), rng.below(15), 0.1, 10.0);
        auto d = inst.candidates.empty() ? run_hiring_above_mean(inst) : run_ccm(inst, rng.below(inst.candidates.size()));
        assign_leftovers(inst, d);
        const auto off = offline_select(inst);
        const auto eps = allocation_mismatch(d.holders, off);
        const auto on_ids = ids(d.holders), off_ids = ids(off);
        double lo_off = 1e300, hi_on = -1e300;
        for (const auto& c : off)
            if (!on_ids.count(c.node)) lo_off = std::min(lo_off, c.score);
        for (const auto& c : d.holders)
            if (!off_ids.count(c.node)) hi_on = std::max(hi_on, c.score);
        const double cost = compute_cost(inst, d.holders);
        if (eps > 0) CHECK(cost >= static_cast<double>(eps) * (lo_off - hi_on) - 1e-9);
        CHECK(cost >= 0.0);
    }

    // The stronger form cost >= 2 * S_min * eps fails on near-ties: the
    // swapped pair differs by 0.01 while S_min = 1.
    const auto inst = make(1, {1.0}, {1.01});
    const std::vector<Candidate> kept{{0, 1.0}};
    CHECK(allocation_mismatch(kept, offline_select(inst)) == 1);
    CHECK(compute_cost(inst, kept) < 2.0 * 1.0 * 1.0);
}

TEST_CASE("quality") {
    const auto inst = make(2, {0, 1}, {2, 3});
    // best two of the pool {0,1,2,3}: ranks 4 and 3 over 4 entries
    CHECK(compute_quality(inst, offline_select(inst)) == doctest::Approx((1.0 + 0.75) / 2.0));
    CHECK(compute_quality(inst, {}) == kInitialQuality);
    const std::vector<Candidate> worst{{0, 0.0}};
    CHECK(compute_quality(inst, worst) == doctest::Approx(0.25));

    Rng rng(8);
    for (int t = 0; t < 500; ++t) {
        const auto r = random_instance(rng, 3, 3, 1 + rng.below(10));
        std::vector<Candidate> pool(r.preselection);
        pool.insert(pool.end(), r.candidates.begin(), r.candidates.end());
        shuffle(pool.begin(), pool.end(), rng);
        pool.resize(3);
        double acc = 0.0;
        for (const auto& c : pool) {
            std::size_t below = 0;
            for (const auto& x : r.preselection) below += x.score <= c.score;
            for (const auto& x : r.candidates) below += x.score <= c.score;
            acc += static_cast<double>(below) / static_cast<double>(r.preselection.size() + r.candidates.size());
        }
        CHECK(compute_quality(r, pool) == doctest::Approx(std::clamp(acc / 3.0, 0.01, 0.99)));
    }
}

TEST_CASE("allocation mismatch") {
    const std::vector<Candidate> a{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
    const std::vector<Candidate> b{{5, 0}, {6, 0}, {7, 0}, {8, 0}, {9, 0}};
    CHECK(allocation_mismatch(a, a) == 0);
    CHECK(allocation_mismatch(a, b) == 5);
    const std::vector<Candidate> c{{0, 0}, {1, 0}, {7, 0}, {8, 0}, {4, 0}};
    CHECK(allocation_mismatch(a, c) == 2);
}

TEST_CASE("instance validation") {
    auto inst = make(1, {1, 2}, {});
    CHECK_THROWS(inst.validate());
    auto dup = make(2, {1}, {2});
    dup.candidates[0].node = 0;
    CHECK_THROWS(dup.validate());
}

TEST_CASE("cutoff table") {
    SUBCASE("near-perfect preselection needs little learning") {
        // With q near 1 keeping the incumbents (c = 0) is already close to
        // optimal; with a poor preselection it is far from it.
        const auto hi = ccm_cost_curve(1, 30, 0.9, 4000, 3);
        const auto lo = ccm_cost_curve(1, 30, 0.1, 4000, 3);
        CHECK(hi[0] <= 1.05 * *std::min_element(hi.begin(), hi.end()));
        CHECK(lo[0] > 2.0 * *std::min_element(lo.begin(), lo.end()));
        CHECK(static_cast<double>(smoothed_argmin(hi)) < 30.0 / std::numbers::e);
    }
    SUBCASE("mid quality, large n: within a factor 2 of sqrt(n) - 1") {
        const std::size_t n = 100;
        const auto c = smoothed_argmin(ccm_cost_curve(1, n, 0.5, 2000, 4));
        const double ref = std::sqrt(static_cast<double>(n)) - 1.0;
        CHECK(static_cast<double>(c) >= ref / 2.0);
        CHECK(static_cast<double>(c) <= ref * 2.0);
    }
    SUBCASE("deterministic, persisted and looked up") {
        CutoffTableOptions opt;
        opt.budget = 2;
        opt.n_grid = {1, 2, 5, 10};
        opt.replicas = 1000;
        opt.seed = 9;
        const auto t1 = build_cutoff_table(opt);
        opt.threads = 3;
        const auto t2 = build_cutoff_table(opt);
        std::stringstream a, b;
        t1.write_csv(a);
        t2.write_csv(b);
        CHECK(a.str() == b.str());
        CHECK(t1.size() == 4 * CutoffTable::default_q_grid().size());
        for (const auto& c : t1.cells()) CHECK(c.c_star < c.n);
        const auto back = CutoffTable::read_csv(a);
        CHECK(back.size() == t1.size());
        CHECK(back.lookup(2, 10, 0.5) == t1.lookup(2, 10, 0.5));
        CHECK(t1.lookup(2, 9, 0.52) == t1.cell(2, 10, 0.5).c_star);
        CHECK(t1.lookup(2, 1, 0.5) == 0);
        CHECK_THROWS(t1.lookup(3, 10, 0.5));
        opt.replicas = 999;
        CHECK_THROWS_AS(build_cutoff_table(opt), std::invalid_argument);
    }
    SUBCASE("smoothed argmin") {
        const std::vector<double> v{5, 4, 0, 4, 1, 1, 1};
        // the isolated dip at index 2 averages to 2.67; the plateau averages to 1
        CHECK(smoothed_argmin(v) == 5);
    }
}
