#include "pskqkd/protocol.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace pskqkd;

TEST_CASE("alphabet states sit at amplitude a with uniformly spaced phases") {
    const ProtocolParams p{5, 1.4, 1.0};
    for (int k = 1; k <= 5; ++k) {
        const PhaseSpacePoint alpha = alphabet_state(k, p);
        CHECK(std::abs(alpha) == doctest::Approx(1.4).epsilon(1e-14));
    }
    // phase spacing 2 pi / N between consecutive letters
    for (int k = 1; k < 5; ++k) {
        const double d = std::arg(alphabet_state(k + 1, p) / alphabet_state(k, p));
        CHECK(d == doctest::Approx(2.0 * std::numbers::pi / 5).epsilon(1e-12));
    }
}

TEST_CASE("alphabet state fixed points") {
    const PhaseSpacePoint last = alphabet_state(14, {14, 1.4, 1.0});
    CHECK(last.real() == 1.4); // k = N lands on phase 0 exactly, no rounding
    CHECK(last.imag() == 0.0);

    const PhaseSpacePoint quarter = alphabet_state(1, {4, 2.0, 1.0});
    CHECK(std::abs(quarter.real()) < 1e-15);
    CHECK(quarter.imag() == doctest::Approx(2.0).epsilon(1e-15));

    const PhaseSpacePoint third = alphabet_state(2, {3, 1.0, 1.0});
    CHECK(third.real() == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(third.imag() == doctest::Approx(-std::sqrt(3.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("alphabet state rejects out-of-range letter indices") {
    const ProtocolParams p{4, 1.0, 1.0};
    CHECK_THROWS_AS(alphabet_state(0, p), std::domain_error);
    CHECK_THROWS_AS(alphabet_state(5, p), std::domain_error);
    CHECK_THROWS_AS(alphabet_state(-3, p), std::domain_error);
}

TEST_CASE("parameter validation bounds") {
    CHECK_THROWS_AS((ProtocolParams{1, 1.0, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{4, -0.1, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{4, 1.0, 1.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ProtocolParams{4, 1.0, -0.01}.validate()), std::invalid_argument);
    CHECK_NOTHROW((ProtocolParams{2, 0.0, 0.0}.validate()));
}

TEST_CASE("coherent overlap values and modulus law") {
    const PhaseSpacePoint alpha(0.7, -1.2);
    CHECK(std::abs(coherent_overlap(alpha, alpha) - 1.0) < 1e-14);

    const PhaseSpacePoint beta(0.3, 0.9);
    CHECK(std::abs(coherent_overlap({0.0, 0.0}, beta)) ==
          doctest::Approx(std::exp(-std::norm(beta) / 2.0)).epsilon(1e-13));

    // |<1|i>|^2 = e^{-|1-i|^2} = e^{-2}
    const double sq = std::norm(coherent_overlap({1.0, 0.0}, {0.0, 1.0}));
    CHECK(sq == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const PhaseSpacePoint a(u(rng), u(rng)), b(u(rng), u(rng));
        const double lhs = std::norm(coherent_overlap(a, b));
        const double rhs = std::exp(-std::norm(a - b));
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("beam splitter limits and energy conservation") {
    SUBCASE("lossless channel leaves Eve the vacuum") {
        const SplitStates s = beam_split(2, {4, 1.3, 1.0});
        CHECK(std::abs(s.eve) == 0.0);
        CHECK(std::abs(s.bob - alphabet_state(2, {4, 1.3, 1.0})) < 1e-15);
    }
    SUBCASE("fully lossy channel hands Eve the letter") {
        const ProtocolParams p{4, 1.3, 0.0};
        const SplitStates s = beam_split(3, p);
        CHECK(std::abs(s.bob) == 0.0);
        CHECK(std::abs(s.eve - alphabet_state(3, p)) < 1e-15);
    }
    SUBCASE("balanced split of the phase-0 letter") {
        const SplitStates s = beam_split(4, {4, 2.0, 0.5});
        CHECK(s.bob.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(s.bob.imag() == 0.0);
        CHECK(s.eve.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    }
    SUBCASE("|bob|^2 + |eve|^2 = a^2 across random parameters") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> ua(0.0, 3.0), ue(0.0, 1.0);
        std::uniform_int_distribution<int> un(2, 16);
        for (int i = 0; i < 200; ++i) {
            const ProtocolParams p{un(rng), ua(rng), ue(rng)};
            const SplitStates s = beam_split(1 + i % p.letters, p);
            CHECK(std::abs(std::norm(s.bob) + std::norm(s.eve) - p.amplitude * p.amplitude) <
                  1e-12);
        }
    }
}

TEST_CASE("decode picks the angularly nearest letter") {
    CHECK(decode({0.5, 0.1}, {4, 1.0, 1.0}) == 4); // sector centered on phase 0

    // any positive scaling of a letter decodes to that letter
    const ProtocolParams p{6, 1.1, 0.8};
    for (int k = 1; k <= 6; ++k) {
        const PhaseSpacePoint alpha = alphabet_state(k, p);
        CHECK(decode(0.3 * alpha, p) == k);
        CHECK(decode(5.0 * alpha, p) == k);
        CHECK(decode(alpha, p) == k);
    }
}

TEST_CASE("decode tie-break at the origin is the smallest index") {
    // all scores are exactly zero at beta = 0, so the documented smallest-index
    // rule is what must come out
    for (int n : {2, 3, 4, 8, 64})
        CHECK(decode({0.0, 0.0}, {n, 1.4, 0.9}) == 1);
}

TEST_CASE("decode rotation covariance off sector boundaries") {
    std::mt19937_64 rng(23);
    for (int n : {2, 3, 5, 8}) {
        const ProtocolParams p{n, 1.0, 1.0};
        const double sector = 2.0 * std::numbers::pi / n;
        std::uniform_real_distribution<double> ur(0.05, 4.0);
        // sample angles away from sector boundaries so rotation cannot flip sectors
        std::uniform_real_distribution<double> ut(-0.45 * sector, 0.45 * sector);
        for (int i = 0; i < 100; ++i) {
            const PhaseSpacePoint beta = std::polar(ur(rng), ut(rng) + (i % n) * sector);
            const int base = decode(beta, p);
            const int rotated = decode(beta * std::polar(1.0, sector), p);
            CHECK(rotated == base % n + 1);
        }
    }
}
