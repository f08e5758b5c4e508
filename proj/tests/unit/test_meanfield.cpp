#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "seqdra/meanfield.hpp"
#include "seqdra/rng.hpp"

using namespace seqdra;

namespace {

// Polynomials in n, coefficient k multiplies n^k.
using Poly = std::array<double, 5>;

Poly mul(const Poly& a, const Poly& b) {
    Poly r{};
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < r.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

Poly add(const Poly& a, const Poly& b) {
    Poly r{};
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

// d/dt E[f(n)] for the coarse-grained birth-death chain with up rate
// (beta k / N) n (N - n) and down rate delta n + rho b, as a polynomial in n.
Poly generator(const MomentParams& p, const Poly& up_jump, const Poly& down_jump) {
    const double a = p.beta * p.mean_degree / p.nodes;
    const Poly up{0.0, a * p.nodes, -a, 0.0, 0.0};
    const Poly down{p.rho * p.budget, p.delta, 0.0, 0.0, 0.0};
    return add(mul(up, up_jump), mul(down, down_jump));
}

double expect(const Poly& poly, const std::array<double, 5>& moments) {
    double s = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) s += poly[k] * moments[k];
    return s;
}

MomentState oracle(const MomentParams& p, double m1, double m2, double m3) {
    // f = n: jumps +1 and -1. f = n^2: (n+1)^2 - n^2 = 2n + 1 and (n-1)^2 - n^2 = 1 - 2n.
    const Poly d1 = generator(p, {1.0}, {-1.0});
    const Poly d2 = generator(p, {1.0, 2.0}, {1.0, -2.0});
    const std::array<double, 5> mom{1.0, m1, m2, m3, 0.0};
    REQUIRE(d1[4] == 0.0);
    REQUIRE(d2[4] == 0.0);
    return {expect(d1, mom), expect(d2, mom)};
}

MomentParams er_params(double budget) { return {3.0, 0.0, 125.0, budget, 10.0, 100.0}; }

}  // namespace

TEST_CASE("moment derivatives match the generator of the birth-death chain") {
    Rng rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        MomentParams p{rng.uniform(0.1, 4.0), rng.uniform(0.0, 2.0), rng.uniform(0.0, 130.0),
                       static_cast<double>(rng.below(20)), rng.uniform(1.0, 12.0), rng.uniform(20.0, 2000.0)};
        const double m1 = rng.uniform(1.0, p.nodes);
        const double m2 = m1 * m1 + rng.uniform(0.0, m1 * (p.nodes - m1));

        const double m3_normal = 3.0 * m2 * m1 - 2.0 * m1 * m1 * m1;
        const auto want_n = oracle(p, m1, m2, m3_normal);
        const auto got_n = moment_rhs(p, {m1, m2}, Closure::normal);
        CHECK(got_n.m1 == doctest::Approx(want_n.m1).scale(p.nodes));
        CHECK(got_n.m2 == doctest::Approx(want_n.m2).epsilon(1e-9).scale(p.nodes * p.nodes));

        const double m3_log = std::pow(m2 / m1, 3.0);
        const auto want_l = oracle(p, m1, m2, m3_log);
        const auto got_l = moment_rhs(p, {m1, m2}, Closure::lognormal);
        CHECK(got_l.m1 == doctest::Approx(want_l.m1).scale(p.nodes));
        CHECK(got_l.m2 == doctest::Approx(want_l.m2).epsilon(1e-9).scale(p.nodes * p.nodes));

        // deterministic closure: first moment with m2 = m1^2
        const auto got_d = moment_rhs(p, {m1, m2}, Closure::deterministic);
        CHECK(got_d.m1 == doctest::Approx(oracle(p, m1, m1 * m1, 0.0).m1).scale(p.nodes));
    }
}

TEST_CASE("sign readings of the first moment equation") {
    const MomentParams none{3.0, 0.5, 125.0, 0.0, 10.0, 100.0};
    const auto zero = moment_rhs(none, {0.0, 0.0}, Closure::normal);
    CHECK(zero.m1 == 0.0);
    CHECK(zero.m2 == 0.0);

    // beta k = delta without resources: dm1/dt = -(beta k / N) m2
    const MomentParams critical{0.2, 2.0, 125.0, 0.0, 10.0, 100.0};
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        const double m1 = rng.uniform(1.0, 100.0);
        const double m2 = m1 * m1 + rng.uniform(0.0, 50.0);
        const auto d = moment_rhs(critical, {m1, m2}, Closure::normal);
        CHECK(d.m1 == doctest::Approx(-0.02 * m2));
        CHECK(d.m1 <= 0.0);
    }
}

TEST_CASE("lognormal closure guard") {
    const auto p = er_params(5.0);
    CHECK_THROWS_AS(closed_third_moment({0.0, 0.0}, Closure::lognormal, 100.0), std::domain_error);
    CHECK_THROWS_AS(closed_third_moment({1e-5, 1e-10}, Closure::lognormal, 100.0), std::domain_error);
    CHECK_THROWS_AS(moment_rhs(p, {5e-5, 1e-8}, Closure::lognormal), std::domain_error);
    CHECK_NOTHROW(closed_third_moment({1e-3, 1e-6}, Closure::lognormal, 100.0));
    CHECK(closed_third_moment({2.0, 8.0}, Closure::lognormal, 100.0) == doctest::Approx(64.0));
    CHECK(closed_third_moment({2.0, 8.0}, Closure::normal, 100.0) == doctest::Approx(32.0));
}

TEST_CASE("deterministic closure follows the logistic solution") {
    // without resources dm/dt = r m - a m^2, m(t) = r / (a + (r / m0 - a) e^{-rt})
    const MomentParams p{0.3, 1.0, 0.0, 0.0, 10.0, 100.0};
    const double r = 2.0, a = 0.03, m0 = 5.0;
    const auto tr = integrate_moments(p, {m0, m0 * m0}, Closure::deterministic, 5.0, 0.1);
    REQUIRE(tr.t.size() == 51);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const double want = r / (a + (r / m0 - a) * std::exp(-r * tr.t[k]));
        CHECK(tr.m1[k] == doctest::Approx(want).epsilon(1e-6));
        CHECK(tr.m2[k] == doctest::Approx(tr.m1[k] * tr.m1[k]));
    }
}

TEST_CASE("integration is converged") {
    const auto p = er_params(5.0);
    for (auto c : {Closure::deterministic, Closure::normal, Closure::lognormal}) {
        const auto coarse = integrate_moments(p, {100.0, 10000.0}, c, 2.0, 0.02);
        const auto fine = integrate_moments(p, {100.0, 10000.0}, c, 2.0, 0.01);
        const auto tight = integrate_moments(p, {100.0, 10000.0}, c, 2.0, 0.02, 1e-11);
        REQUIRE(fine.t.size() == 2 * coarse.t.size() - 1);
        for (std::size_t k = 0; k < coarse.t.size(); ++k) {
            CHECK(fine.t[2 * k] == doctest::Approx(coarse.t[k]));
            CHECK(std::abs(fine.m1[2 * k] - coarse.m1[k]) < 1e-5 * p.nodes);
            CHECK(std::abs(tight.m1[k] - coarse.m1[k]) < 1e-5 * p.nodes);
        }
    }
}

TEST_CASE("trajectories stay in range and keep the Jensen gap") {
    const auto p = er_params(5.0);
    for (auto c : {Closure::normal, Closure::lognormal}) {
        for (double m0 : {100.0, 60.0, 20.0}) {
            const double var0 = m0 * (100.0 - m0) / 100.0;
            const auto tr = integrate_moments(p, {m0, m0 * m0 + var0}, c, 3.0, 0.01);
            for (std::size_t k = 0; k < tr.t.size(); ++k) {
                CHECK(tr.m1[k] >= 0.0);
                CHECK(tr.m1[k] <= 100.0);
                CHECK(tr.m2[k] - tr.m1[k] * tr.m1[k] >= -1e-6 * 100.0 * 100.0);
            }
        }
    }
    // strong treatment drives the mean to zero, where it stays
    const MomentParams heavy{0.5, 1.0, 125.0, 5.0, 4.0, 100.0};
    const auto tr = integrate_moments(heavy, {30.0, 900.0}, Closure::deterministic, 2.0, 0.05);
    CHECK(tr.m1.back() == 0.0);
    bool hit = false;
    for (double m : tr.m1) {
        if (hit) CHECK(m == 0.0);
        hit = hit || m == 0.0;
    }
    CHECK_THROWS(integrate_moments(heavy, {30.0, 900.0}, Closure::normal, 1.0, 0.0));
}

TEST_CASE("closure names and csv") {
    for (auto c : {Closure::normal, Closure::lognormal, Closure::deterministic}) CHECK(parse_closure(to_string(c)) == c);
    CHECK_THROWS(parse_closure("gamma"));
    const auto tr = integrate_moments(er_params(5.0), {100.0, 10000.0}, Closure::normal, 0.2, 0.1);
    std::ostringstream out;
    write_trajectory_csv(tr, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,m1,m2,closure");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1) == "normal");
    }
    CHECK(rows == 3);
}
