#include "mbdl/observables.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace mbdl;
using mbdl::testing::Gen;

TEST_SUITE("observables") {

TEST_CASE("configuration counts") {
    CHECK(config_count_n(4, 2, 2, 2) == 4);
    CHECK(config_count_n(7, 3, 3, 0) == 1);
    CHECK(config_count_n(3, 1, 2, 2) == 0);
    CHECK(config_count_n(3, 1, 2, 5) == 0);
    CHECK(config_count_n(3, 4, 2, 1) == 0);
}

TEST_CASE("property: counts equal exhaustive enumeration, sum to 2^|S'| and respect up/down exchange") {
    for (int sp = 0; sp <= 10; ++sp)
        for (int n = 0; n <= sp; ++n) {
            const Config ref = (Config{1} << n) - 1;
            std::vector<std::vector<std::uint64_t>> tally(sp + 1, std::vector<std::uint64_t>(sp + 1, 0));
            for (Config w = 0; w < (Config{1} << sp); ++w) ++tally[popcount(w)][hamming(ref, w)];
            std::uint64_t total = 0;
            for (int m = 0; m <= sp; ++m)
                for (int d = 0; d <= sp; ++d) {
                    CHECK(config_count_n(sp, n, m, d) == tally[m][d]);
                    CHECK(config_count_n(sp, n, m, d) == config_count_n(sp, sp - n, sp - m, d));
                    total += config_count_n(sp, n, m, d);
                }
            CHECK(total == (std::uint64_t{1} << sp));
        }
}

TEST_CASE("magnetisation bounds") {
    const double zeta = 0.7, u = std::exp(-2.0 / zeta);
    const auto one = magnetisation_bounds(1, 1, 1.0, zeta);
    CHECK(one.n_up == doctest::Approx(2.0));
    CHECK(one.n_down == doctest::Approx(2.0 * u));
    CHECK(one.upper == doctest::Approx(1.0));
    CHECK(one.lower == doctest::Approx(1.0 - 2.0 * u));
    CHECK(one.m0 == 1.0);

    for (int sp = 1; sp <= 8; ++sp)
        for (int n0 = 0; n0 <= sp; ++n0) {
            const auto b = magnetisation_bounds(sp, n0, 1.0, 1e-3);
            CHECK(std::abs(b.lower - b.m0) < 1e-6);
            CHECK(std::abs(b.upper - b.m0) < 1e-6);
            CHECK(b.m0 == doctest::Approx(2.0 * n0 / sp - 1.0));
        }

    const auto big = magnetisation_bounds(4, 2, 2.0, 3.0);
    CHECK(big.out_of_range);
    const auto c = big.clamped();
    CHECK(c.lower >= -1.0);
    CHECK(c.upper <= 1.0);
    CHECK_THROWS_AS(magnetisation_bounds(3, 4, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(magnetisation_bounds(3, 1, 1.0, 0.0), DomainError);
}

TEST_CASE("mixed initial states") {
    const auto pure = magnetisation_bounds(4, 3, 1.2, 0.8);
    const auto point = magnetisation_bounds_mixed({{0b1011, 1.0}}, 4, 1.2, 0.8);
    CHECK(point.lower == doctest::Approx(pure.lower).epsilon(1e-14));
    CHECK(point.upper == doctest::Approx(pure.upper).epsilon(1e-14));

    const auto half = magnetisation_bounds_mixed({{0b0011, 0.5}, {0b1100, 0.5}}, 4, 1.0, 0.9);
    CHECK(half.n_up == doctest::Approx(half.n_down).epsilon(1e-14));
    const auto skew = magnetisation_bounds_mixed({{0b0001, 0.5}, {0b1110, 0.5}}, 4, 1.0, 0.9);
    CHECK(skew.n_up == doctest::Approx(skew.n_down).epsilon(1e-14));

    std::map<Config, double> uniform;
    double m0 = 0.0;
    for (Config a : {0b000u, 0b001u, 0b011u, 0b111u, 0b101u}) {
        uniform[a] = 0.2;
        m0 += 0.2 * (2.0 * popcount(a) / 3 - 1.0);
    }
    const auto u = magnetisation_bounds_mixed(uniform, 3, 1.0, 1e-3);
    CHECK(u.m0 == doctest::Approx(m0));
    CHECK(std::abs(u.lower - m0) < 1e-6);
    CHECK(std::abs(u.upper - m0) < 1e-6);

    CHECK_THROWS_AS(magnetisation_bounds_mixed({{0b01, 0.6}, {0b10, 0.3}}, 2, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(magnetisation_bounds_mixed({{0b100, 1.0}}, 2, 1.0, 1.0), ParameterError);
}

TEST_CASE("correlation bounds") {
    // i up, j down: tau(0) = -1
    const Config alpha = 0b0000000111;  // |alpha| = 3 on ten sites
    const auto b = correlation_bounds(10, alpha, 0, 5, 1.0, 1e-3);
    CHECK(b.tau0 == -1.0);
    CHECK(std::abs(b.tau_minus + 1.0) < 1e-6);
    CHECK(std::abs(b.tau_plus + 1.0) < 1e-6);

    // flipping i in alpha swaps the K and Q sums
    Gen gen(41);
    for (int trial = 0; trial < 50; ++trial) {
        const int sp = gen.integer(2, 8);
        const Config a = static_cast<Config>(gen.integer(0, (1 << sp) - 1));
        const auto ij = gen.sites(sp, 2);
        const double zeta = gen.real(0.1, 3.0), c = gen.real(0.5, 2.0);
        const auto x = correlation_bounds(sp, a, ij[0], ij[1], c, zeta);
        const auto y = correlation_bounds(sp, a ^ (Config{1} << ij[0]), ij[0], ij[1], c, zeta);
        CHECK(x.k_val == doctest::Approx(y.q_val).epsilon(1e-13));
        CHECK(x.q_val == doctest::Approx(y.k_val).epsilon(1e-13));
        // K + Q covers every omega once
        CHECK(x.k_val + x.q_val == doctest::Approx(c * c * std::pow(1 + std::exp(-2 / zeta), sp)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(correlation_bounds(3, 0, 1, 1, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(correlation_bounds(1, 0, 0, 1, 1.0, 1.0), ParameterError);
}

TEST_CASE("property: zeta -> 0 limits collapse every interval") {
    for (int sp = 2; sp <= 7; ++sp)
        for (Config a = 0; a < (Config{1} << sp); ++a)
            for (int i = 0; i < sp; ++i)
                for (int j = 0; j < sp; ++j) {
                    if (i == j) continue;
                    const auto ij = correlation_bounds(sp, a, i, j, 1.0, 1e-3);
                    const auto ji = correlation_bounds(sp, a, j, i, 1.0, 1e-3);
                    CHECK(std::abs(ij.tau_minus - ij.tau0) < 1e-6);
                    CHECK(std::abs(ij.tau_plus - ij.tau0) < 1e-6);
                    const auto chi = susceptibility_bound(ij, ji);
                    CHECK(std::abs(chi.first) < 1e-6);
                    CHECK(std::abs(chi.second) < 1e-6);
                }
}

TEST_CASE("property: intervals widen with zeta and C") {
    Gen gen(42);
    for (int trial = 0; trial < 100; ++trial) {
        const int sp = gen.integer(2, 8);
        const Config a = static_cast<Config>(gen.integer(0, (1 << sp) - 1));
        const auto ij = gen.sites(sp, 2);
        const double c = gen.real(0.5, 2.0);
        double prev_m = -1e300, prev_t = -1e300, prev_x = -1e300;
        for (int k = 1; k <= 40; ++k) {
            const double zeta = 0.05 * k;
            const double wm = magnetisation_bounds(sp, popcount(a), c, zeta).width();
            const auto bij = correlation_bounds(sp, a, ij[0], ij[1], c, zeta);
            const auto bji = correlation_bounds(sp, a, ij[1], ij[0], c, zeta);
            const auto chi = susceptibility_bound(bij, bji);
            CHECK(wm >= prev_m);
            CHECK(bij.width() >= prev_t);
            CHECK(chi.second - chi.first >= prev_x);
            prev_m = wm;
            prev_t = bij.width();
            prev_x = chi.second - chi.first;
        }
        const double zeta = gen.real(0.1, 2.0);
        CHECK(magnetisation_bounds(sp, popcount(a), c * 1.1, zeta).width() >=
              magnetisation_bounds(sp, popcount(a), c, zeta).width());
        CHECK(correlation_bounds(sp, a, ij[0], ij[1], c * 1.1, zeta).width() >=
              correlation_bounds(sp, a, ij[0], ij[1], c, zeta).width());
    }
}

TEST_CASE("susceptibility is symmetric for equal spins") {
    const Config a = 0b0110;
    const auto ij = correlation_bounds(4, a, 1, 2, 1.0, 0.6);
    const auto ji = correlation_bounds(4, a, 2, 1, 1.0, 0.6);
    const auto chi = susceptibility_bound(ij, ji);
    CHECK(chi.first == doctest::Approx(-chi.second));
    const auto kk = susceptibility_bound(correlation_bounds(4, 0, 0, 3, 1.0, 0.6), correlation_bounds(4, 0, 3, 0, 1.0, 0.6));
    CHECK(kk.first == doctest::Approx(-kk.second));
}

}
