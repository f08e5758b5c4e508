#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqdra/epidemic.hpp"
#include "seqdra/graph.hpp"
#include "seqdra/rng.hpp"

using namespace seqdra;

namespace {

Graph path(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
    return Graph(n, e);
}

Graph complete(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return Graph(n, e);
}

double brute_infection(const Graph& g, const EpidemicState& s, double beta) {
    double total = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        for (std::size_t j = 0; j < g.node_count(); ++j)
            if (g.has_edge(static_cast<NodeId>(i), static_cast<NodeId>(j)) && !s.is_infected(static_cast<NodeId>(i)) &&
                s.is_infected(static_cast<NodeId>(j)))
                total += beta;
    return total;
}

double brute_recovery(const EpidemicState& s, const EpidemicParams& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.node_count(); ++i) {
        const auto id = static_cast<NodeId>(i);
        if (s.is_infected(id)) total += p.delta + p.rho * (s.is_treated(id) ? 1.0 : 0.0);
    }
    return total;
}

}  // namespace

TEST_CASE("node rates") {
    // star: center 0 with leaves 1..3
    const std::vector<Edge> e{{0, 1}, {0, 2}, {0, 3}};
    Graph g(4, e);
    EpidemicState s(g);
    EpidemicParams p{3.0, 0.0, 125.0, 5};
    const std::vector<NodeId> none;
    s.reset(none);
    CHECK(node_rate(s, p, 0) == 0.0);

    const std::vector<NodeId> leaves{1, 2, 3};
    s.reset(leaves);
    CHECK(node_rate(s, p, 0) == doctest::Approx(9.0));
    s.treat(1);
    CHECK(node_rate(s, p, 1) == doctest::Approx(125.0));
    CHECK(node_rate(s, p, 2) == doctest::Approx(0.0));
    CHECK_THROWS(s.treat(0));
}

TEST_CASE("aggregate pressures") {
    const auto k5 = complete(5);
    EpidemicState s(k5);
    EpidemicParams p{2.0, 0.0, 125.0, 5};
    s.infect_all();
    CHECK(total_infection_pressure(s, p) == 0.0);
    for (NodeId i = 0; i < 5; ++i) s.treat(i);
    CHECK(total_recovery_pressure(s, p) == doctest::Approx(625.0));

    const std::vector<NodeId> none;
    s.reset(none);
    CHECK(total_recovery_pressure(s, p) == 0.0);

    const auto g = generate_watts_strogatz(30, 4, 0.1, 2);
    EpidemicState one(g);
    const std::vector<NodeId> single{7};
    one.reset(single);
    CHECK(total_infection_pressure(one, p) == doctest::Approx(2.0 * static_cast<double>(g.degree(7))));

    Rng rng(5);
    const auto er = generate_erdos_renyi(40, 0.15, 3);
    EpidemicState r(er);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<NodeId> inf;
        for (NodeId i = 0; i < 40; ++i)
            if (rng.bernoulli(0.4)) inf.push_back(i);
        r.reset(inf);
        for (NodeId i : inf)
            if (rng.bernoulli(0.3)) r.treat(i);
        EpidemicParams q{rng.uniform(0.1, 3.0), rng.uniform(0.0, 2.0), rng.uniform(0.0, 50.0), 5};
        CHECK(total_infection_pressure(r, q) == doctest::Approx(brute_infection(er, r, q.beta)));
        CHECK(total_recovery_pressure(r, q) == doctest::Approx(brute_recovery(r, q)));
    }
}

TEST_CASE("event application keeps caches in sync") {
    const auto g = path(3);
    EpidemicState s(g);
    s.infect_all();
    CHECK(s.pressure(0) == 1);
    CHECK(s.pressure(2) == 1);
    s.apply({1, EventKind::recovery, 0.5});
    CHECK(s.pressure(0) == 0);
    CHECK(s.pressure(2) == 0);
    CHECK(s.time() == doctest::Approx(0.5));
    const auto before = s.infected_count();
    s.apply({1, EventKind::infection, 0.25});
    CHECK(s.infected_count() == before + 1);
    CHECK_THROWS(s.apply({1, EventKind::infection, 0.1}));

    s.treat(2);
    s.apply({2, EventKind::recovery, 0.1});
    CHECK(s.treated_count() == 0);
    CHECK_FALSE(s.is_treated(2));

    // Random replay: every event flips one node and caches match a rebuild.
    const auto er = generate_erdos_renyi(60, 0.1, 8);
    EpidemicState r(er);
    r.infect_all();
    EpidemicParams p{1.0, 1.0, 5.0, 3};
    Rng rng(13);
    for (int step = 0; step < 3000; ++step) {
        if (r.infected_count() == 0) r.infect_all();
        while (r.treated_count() < std::min<std::size_t>(p.budget, r.infected_count())) {
            const auto inf = r.infected_nodes();
            const auto pick = inf[rng.below(inf.size())];
            if (!r.is_treated(pick)) r.treat(pick);
        }
        const auto n_before = r.infected_count();
        const auto e = sample_next_event(r, p, rng);
        CHECK(e.dt > 0.0);
        CHECK(r.is_infected(e.node) == (e.kind == EventKind::recovery));
        r.apply(e);
        CHECK(std::abs(static_cast<long>(r.infected_count()) - static_cast<long>(n_before)) == 1);
        REQUIRE(r.caches_consistent());
    }
}

TEST_CASE("event sampler") {
    SUBCASE("absorbing state") {
        const auto g = path(3);
        EpidemicState s(g);
        const std::vector<NodeId> none;
        s.reset(none);
        Rng rng(1);
        CHECK_THROWS_AS(sample_next_event(s, EpidemicParams{1.0, 1.0, 0.0, 0}, rng), AbsorbingState);
    }
    SUBCASE("symmetric choice between isolated infected nodes") {
        Graph g(2, std::vector<Edge>{});
        EpidemicState s(g);
        s.infect_all();
        Rng rng(2);
        int first = 0;
        const int draws = 20000;
        for (int k = 0; k < draws; ++k) first += sample_next_event(s, EpidemicParams{1.0, 1.0, 0.0, 0}, rng).node == 0;
        // binomial(20000, 1/2): 4 standard deviations is about 283
        CHECK(std::abs(first - draws / 2) < 283);
    }
    SUBCASE("waiting time mean on a fully infected triangle") {
        const auto g = complete(3);
        EpidemicState s(g);
        s.infect_all();
        Rng rng(3);
        const int draws = 100000;
        double sum = 0.0, sq = 0.0;
        for (int k = 0; k < draws; ++k) {
            const double dt = sample_next_event(s, EpidemicParams{7.0, 1.0, 0.0, 0}, rng).dt;
            sum += dt;
            sq += dt * dt;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((sq / draws - mean * mean) / draws);
        CHECK(std::abs(mean - 1.0 / 3.0) < 3.0 * se);
    }
    SUBCASE("extinction without resources") {
        const auto g = generate_watts_strogatz(20, 4, 0.1, 4);
        EpidemicParams p{0.3, 1.0, 0.0, 0};
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            EpidemicState s(g);
            s.infect_all();
            Rng rng(seed);
            std::size_t steps = 0;
            while (s.infected_count() > 0 && steps < 1'000'000) {
                s.apply(sample_next_event(s, p, rng));
                ++steps;
            }
            CHECK(s.infected_count() == 0);
        }
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS(EpidemicParams{0.0, 0.0, 1.0, 1}.validate());
    CHECK_THROWS(EpidemicParams{1.0, -1.0, 1.0, 1}.validate());
    CHECK_THROWS(EpidemicParams{1.0, 0.0, -1.0, 1}.validate());
    CHECK_NOTHROW(EpidemicParams{3.0, 0.0, 125.0, 5}.validate());
}
