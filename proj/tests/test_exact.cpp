#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <vector>

#include "pme/exact.hpp"
#include "pme/rng.hpp"

using pme::BigInt;
using pme::BigRational;
using pme::companion_moment_exact;
using pme::ExactMoment;
using pme::isserlis_expectation;
using pme::limit_moment_via_matchings;
using pme::LinkFunction;
using pme::PatternMode;

namespace {

std::vector<LinkFunction> builtin_links() {
    return {LinkFunction::block_circulant(1), LinkFunction::block_circulant(2),
            LinkFunction::block_circulant(3), LinkFunction::example_f2(),
            LinkFunction::example_f3()};
}

ExactMoment rational(long long num, long long den) {
    return ExactMoment(BigInt(num), BigInt(den));
}

}  // namespace

TEST_CASE("double factorial and moment bound") {
    CHECK(pme::double_factorial(-1) == 1);
    CHECK(pme::double_factorial(0) == 1);
    CHECK(pme::double_factorial(3) == 3);
    CHECK(pme::double_factorial(7) == 105);
    CHECK(pme::moment_bound(2, 4) == 6);
    CHECK(pme::moment_bound(1, 2) == 1);
    CHECK(pme::moment_bound(3, 6) == 9 * 15);
    CHECK_THROWS_AS(pme::moment_bound(2, 3), std::invalid_argument);
}

TEST_CASE("pattern enumeration") {
    std::size_t count = 0;
    pme::for_each_pattern(1, 2, PatternMode::Full,
                          [&](std::span<const std::uint32_t> p, std::uint64_t) {
                              ++count;
                              CHECK(p.size() == 2);
                              CHECK(p[0] == 0);
                          });
    CHECK(count == 1);

    count = 0;
    pme::for_each_pattern(2, 2, PatternMode::Full,
                          [&](std::span<const std::uint32_t>, std::uint64_t) { ++count; });
    CHECK(count == 4);

    // cyclic-reduced multiplicities cover the full tuple space
    std::uint64_t mass = 0;
    std::size_t representatives = 0;
    pme::for_each_pattern(2, 4, PatternMode::CyclicReduced,
                          [&](std::span<const std::uint32_t>, std::uint64_t mult) {
                              mass += mult;
                              ++representatives;
                          });
    CHECK(mass == 16);
    CHECK(representatives == 6);  // Burnside: (16 + 2 + 4 + 2)/4
}

TEST_CASE("Isserlis pairing sums") {
    CHECK(isserlis_expectation({{0, 1}, {1, 0}}) == 1);

    // fourth moment of one standard normal
    std::vector<std::vector<int>> all_ones(4, std::vector<int>(4, 1));
    for (int i = 0; i < 4; ++i) all_ones[i][i] = 0;
    CHECK(isserlis_expectation(all_ones) == 3);

    // E|z|^4 for one complex unit Gaussian: covariance only between
    // opposite-conjugation slots (z, z*, z, z*)
    const std::vector<std::vector<int>> alternating = {
        {0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}};
    CHECK(isserlis_expectation(alternating) == 2);

    CHECK(isserlis_expectation({}) == 1);
    CHECK(isserlis_expectation({{0}}) == 0);  // odd dimension

    CHECK_THROWS_AS(isserlis_expectation({{0, 1}, {2, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(isserlis_expectation({{0, 1}}), std::invalid_argument);

    std::vector<std::vector<int>> six(6, std::vector<int>(6, 1));
    for (int i = 0; i < 6; ++i) six[i][i] = 0;
    CHECK(isserlis_expectation(six) == 15);
}

TEST_CASE("Isserlis sums are invariant under simultaneous permutation") {
    const auto gue = pme::build_companion_classes(LinkFunction::block_circulant(2), 2);
    const std::array<std::uint32_t, 6> pattern = {0, 1, 0, 1, 0, 0};
    const auto cov = pme::cyclic_covariance(gue, pattern);
    const BigInt reference = isserlis_expectation(cov);
    std::array<std::size_t, 6> perm = {0, 1, 2, 3, 4, 5};
    for (int shuffle = 0; shuffle < 6; ++shuffle) {
        std::next_permutation(perm.begin(), perm.end());
        std::vector<std::vector<int>> permuted(6, std::vector<int>(6, 0));
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) permuted[perm[i]][perm[j]] = cov[i][j];
        CHECK(isserlis_expectation(permuted) == reference);
    }
}

TEST_CASE("dual routes agree on random link functions") {
    pme::RandomStream gen(2718, 0, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t k = 1 + gen.next_u64() % 3;
        std::vector<std::vector<std::uint32_t>> table(k, std::vector<std::uint32_t>(k));
        for (auto& row : table)
            for (auto& v : row) v = static_cast<std::uint32_t>(gen.next_u64() % k);
        const LinkFunction f(k, table);
        for (unsigned m : {2, 4}) {
            CHECK(limit_moment_via_matchings(f, m) == companion_moment_exact(f, f.k(), m));
        }
        if (k <= 2) {
            CHECK(limit_moment_via_matchings(f, 6) == companion_moment_exact(f, f.k(), 6));
        }
    }
}

TEST_CASE("cyclic covariance structures") {
    const auto gue = pme::build_companion_classes(LinkFunction::block_circulant(2), 2);
    const std::array<std::uint32_t, 4> alt = {0, 1, 0, 1};
    const auto cov = pme::cyclic_covariance(gue, alt);
    CHECK(cov[0][1] == 1);
    CHECK(cov[2][3] == 1);
    CHECK(cov[0][3] == 1);
    CHECK(cov[1][2] == 1);
    CHECK(cov[0][2] == 0);
    CHECK(cov[1][3] == 0);
    CHECK(isserlis_expectation(cov) == 2);

    const auto f3 = pme::build_companion_classes(LinkFunction::example_f3(), 2);
    const auto cov3 = pme::cyclic_covariance(f3, alt);
    for (int l = 0; l < 4; ++l)
        for (int t = 0; t < 4; ++t)
            if (l != t) CHECK(cov3[l][t] == 1);
    CHECK(isserlis_expectation(cov3) == 3);

    const std::array<std::uint32_t, 4> diag = {0, 0, 1, 1};
    const auto covd = pme::cyclic_covariance(gue, diag);
    CHECK(covd[0][2] == 0);  // independent diagonal entries
    CHECK(isserlis_expectation(covd) == 0);
}

TEST_CASE("companion moments: frozen values") {
    // order 2 is the shared unit variance
    for (const auto& f : builtin_links()) {
        CHECK(companion_moment_exact(f, f.k(), 2) == rational(1, 1));
        CHECK(companion_moment_exact(f, 2 * f.k(), 2) == rational(1, 1));
    }
    // Gaussian endpoint: 1x1 companion is one real standard normal
    const auto bc1 = LinkFunction::block_circulant(1);
    CHECK(companion_moment_exact(bc1, 1, 4) == rational(3, 1));
    CHECK(companion_moment_exact(bc1, 1, 6) == rational(15, 1));
    CHECK(companion_moment_exact(bc1, 1, 8) == rational(105, 1));

    // 2x2 companions, checked by hand from E tr H^4
    CHECK(companion_moment_exact(LinkFunction::block_circulant(2), 2, 4) == rational(9, 4));
    CHECK(companion_moment_exact(LinkFunction::example_f2(), 2, 4) == rational(11, 4));
    CHECK(companion_moment_exact(LinkFunction::example_f3(), 2, 4) == rational(5, 2));

    // order-4 block-circulant closed trend toward the Catalan number 2
    for (std::size_t k : {2, 5, 10, 20}) {
        const auto value = companion_moment_exact(LinkFunction::block_circulant(k), k, 4);
        CHECK(value == ExactMoment(BigInt(2 * k * k + 1), BigInt(k * k)));
    }
    CHECK(companion_moment_exact(LinkFunction::block_circulant(20), 20, 4) == rational(801, 400));

    // odd orders vanish, order zero is the total mass
    for (const auto& f : builtin_links()) {
        CHECK(companion_moment_exact(f, f.k(), 0) == rational(1, 1));
        for (unsigned m : {1, 3, 5, 7}) {
            CHECK(companion_moment_exact(f, f.k(), m) == rational(0, 1));
            CHECK(limit_moment_via_matchings(f, m) == rational(0, 1));
        }
    }
}

TEST_CASE("full and cyclic-reduced enumeration agree") {
    for (const auto& f : builtin_links()) {
        for (unsigned m : {2, 4, 6}) {
            CHECK(companion_moment_exact(f, f.k(), m, PatternMode::Full) ==
                  companion_moment_exact(f, f.k(), m, PatternMode::CyclicReduced));
        }
    }
}

TEST_CASE("worker count never changes the exact result") {
    const auto f = LinkFunction::block_circulant(3);
    const auto serial = companion_moment_exact(f, 6, 6, PatternMode::CyclicReduced, 1);
    const auto parallel = companion_moment_exact(f, 6, 6, PatternMode::CyclicReduced, 3);
    CHECK(serial == parallel);
}

TEST_CASE("dual routes agree: matchings against Isserlis") {
    for (const auto& f : builtin_links()) {
        for (unsigned m : {2, 4, 6}) {
            CHECK(limit_moment_via_matchings(f, m) == companion_moment_exact(f, f.k(), m));
        }
    }
}

TEST_CASE("companion moments are stable across sizes") {
    for (const auto& f : builtin_links()) {
        for (unsigned m : {2, 4}) {
            const auto base = companion_moment_exact(f, f.k(), m);
            CHECK(companion_moment_exact(f, 2 * f.k(), m) == base);
            CHECK(companion_moment_exact(f, 3 * f.k(), m) == base);
        }
    }
}

TEST_CASE("moments respect the Gaussian comparison bound") {
    for (const auto& f : builtin_links()) {
        for (unsigned m : {2, 4, 6, 8}) {
            const auto value = companion_moment_exact(f, f.k(), m);
            CHECK(value.value() <= BigRational(pme::moment_bound(f.k(), m)));
        }
    }
}

TEST_CASE("reduced denominators divide the normalization") {
    for (const auto& f : builtin_links()) {
        for (unsigned m : {4, 6}) {
            const auto value = companion_moment_exact(f, f.k(), m);
            BigInt norm = 1;
            for (unsigned e = 0; e < 1 + m / 2; ++e) norm *= f.k();
            CHECK(norm % value.denominator() == 0);
        }
    }
}

TEST_CASE("difference profiles and the closed-form count") {
    const std::array<std::uint32_t, 4> constant = {0, 0, 0, 0};
    CHECK(pme::closed_form_matching_count(constant, 2) == 3);

    // the closed form ignores pair compatibility: it counts 3 here, while
    // the conformance-aware enumeration keeps E|b|^4 = 2
    const std::array<std::uint32_t, 4> alternating = {0, 1, 0, 1};
    CHECK(pme::closed_form_matching_count(alternating, 2) == 3);
    const auto gue = pme::build_companion_classes(LinkFunction::block_circulant(2), 2);
    CHECK(isserlis_expectation(pme::cyclic_covariance(gue, alternating)) == 2);

    const std::array<std::uint32_t, 3> odd = {0, 0, 1};
    CHECK_THROWS_AS(pme::closed_form_matching_count(odd, 2), std::invalid_argument);

    // unbalanced opposite sets make the count zero
    const std::array<std::uint32_t, 4> unbalanced = {0, 1, 2, 0};
    const auto profile = pme::difference_profile(unbalanced, 3);
    CHECK_FALSE(profile.matchable);
    CHECK(pme::closed_form_matching_count(unbalanced, 3) == 0);

    // mixed example: k=3, differences (1, -1, 0, 0)
    const std::array<std::uint32_t, 4> mixed = {1, 0, 0, 0};
    const auto mixed_profile = pme::difference_profile(mixed, 3);
    CHECK(mixed_profile.sets[0].size() == 2);
    CHECK(mixed_profile.sets[1].size() == 1);
    CHECK(mixed_profile.sets[2].size() == 1);
    CHECK(pme::closed_form_matching_count(mixed, 3) == 1);
}

TEST_CASE("carleman partial sums") {
    const auto sums = pme::carleman_partial_sums(2, 50);
    CHECK(sums.size() == 50);
    for (std::size_t i = 1; i < sums.size(); ++i) CHECK(sums[i] > sums[i - 1]);
    CHECK(sums.back() > sums.front() + 1.0);
    CHECK(sums.front() == doctest::Approx(1.0));  // order-2 bound is 1
}

TEST_CASE("budget refusals") {
    CHECK_THROWS_AS(companion_moment_exact(LinkFunction::block_circulant(20), 20, 8),
                    pme::BudgetError);
    CHECK_THROWS_AS(limit_moment_via_matchings(LinkFunction::block_circulant(20), 8),
                    pme::BudgetError);
    CHECK_THROWS_AS(companion_moment_exact(LinkFunction::block_circulant(2), 3, 4),
                    std::invalid_argument);  // K not a multiple of k
}
