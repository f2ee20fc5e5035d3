#include "pme/exact.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <iostream>
#include <thread>

namespace pme {

namespace detail {

std::uint64_t checked_pow(std::size_t base, unsigned exp, std::uint64_t cap) {
    std::uint64_t result = 1;
    for (unsigned e = 0; e < exp; ++e) {
        if (base != 0 && result > cap / base)
            throw BudgetError("exact enumeration budget exceeded: " + std::to_string(base) + "^" +
                              std::to_string(exp) + " tuples");
        result *= base;
    }
    return result;
}

}  // namespace detail

namespace {

std::uint64_t u64_double_factorial(unsigned n) {
    std::uint64_t r = 1;
    for (unsigned v = n; v > 1; v -= 2) r *= v;
    return r;
}

void check_step_budget(std::size_t base, unsigned m) {
    const std::uint64_t tuples = detail::checked_pow(base, m, kExactStepBudget);
    const std::uint64_t pairings = m > 0 ? u64_double_factorial(m - 1) : 1;
    if (tuples > kExactStepBudget / std::max<std::uint64_t>(pairings, 1))
        throw BudgetError("exact enumeration budget exceeded: " + std::to_string(base) + "^" +
                          std::to_string(m) + " tuples x " + std::to_string(pairings) +
                          " pairings");
}

constexpr unsigned kMaxCyclicLength = 32;

// Pairing count over a {0,1} covariance given as neighbor bitmasks: pair the
// lowest unused index with every covarying partner and recurse.
std::uint64_t count_pairings(const std::uint32_t* rows, std::uint32_t unused) {
    if (unused == 0) return 1;
    const unsigned l = static_cast<unsigned>(std::countr_zero(unused));
    const std::uint32_t rest = unused & (unused - 1);
    std::uint32_t candidates = rows[l] & rest;
    std::uint64_t total = 0;
    while (candidates != 0) {
        const unsigned t = static_cast<unsigned>(std::countr_zero(candidates));
        candidates &= candidates - 1;
        total += count_pairings(rows, rest & ~(std::uint32_t{1} << t));
    }
    return total;
}

// Per-position view of a companion class map, flattened for the hot loop.
struct CompanionView {
    std::size_t n;
    std::vector<std::uint32_t> cls;
    std::vector<std::uint8_t> conj;
    std::vector<std::uint8_t> real;

    explicit CompanionView(const EntryClassMap& map) : n(map.size()) {
        cls.resize(n * n);
        conj.resize(n * n);
        real.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto ref = map.at(i, j);
                cls[i * n + j] = ref.class_id;
                conj[i * n + j] = ref.conjugated ? 1 : 0;
                real[i * n + j] =
                    map.class_kind(ref.class_id) == ClassKind::RealGaussian ? 1 : 0;
            }
        }
    }

    // Wick expectation of the cyclic product along the tuple.
    std::uint64_t cyclic_expectation(std::span<const std::uint32_t> tuple) const {
        const unsigned m = static_cast<unsigned>(tuple.size());
        std::uint32_t c[kMaxCyclicLength];
        std::uint8_t cj[kMaxCyclicLength];
        std::uint8_t re[kMaxCyclicLength];
        for (unsigned l = 0; l < m; ++l) {
            const std::size_t p = static_cast<std::size_t>(tuple[l]) * n + tuple[(l + 1) % m];
            c[l] = cls[p];
            cj[l] = conj[p];
            re[l] = real[p];
        }
        std::uint32_t rows[kMaxCyclicLength] = {};
        for (unsigned l = 0; l < m; ++l) {
            for (unsigned t = l + 1; t < m; ++t) {
                if (c[l] == c[t] && (re[l] || cj[l] != cj[t])) {
                    rows[l] |= std::uint32_t{1} << t;
                    rows[t] |= std::uint32_t{1} << l;
                }
            }
        }
        return count_pairings(rows, (std::uint32_t{1} << m) - 1);
    }
};

BigInt integer_pow(std::size_t base, unsigned exp) {
    BigInt r = 1;
    for (unsigned e = 0; e < exp; ++e) r *= base;
    return r;
}

}  // namespace

std::string ExactMoment::to_string() const {
    return numerator().str() + "/" + denominator().str();
}

BigInt double_factorial(long long n) {
    BigInt r = 1;
    for (long long v = n; v > 1; v -= 2) r *= v;
    return r;
}

BigInt isserlis_expectation(const std::vector<std::vector<int>>& cov) {
    const std::size_t dim = cov.size();
    for (const auto& row : cov) {
        if (row.size() != dim)
            throw std::invalid_argument("isserlis_expectation: covariance matrix is not square");
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j)
            if (cov[i][j] != cov[j][i])
                throw std::invalid_argument("isserlis_expectation: covariance matrix is not symmetric");
    if (dim == 0) return 1;
    if (dim % 2 != 0) {
        std::cerr << "isserlis_expectation: odd dimension " << dim
                  << ", returning 0 (odd Gaussian moments vanish)\n";
        return 0;
    }

    // Pair the lowest unpaired index with each later unpaired index.
    std::vector<bool> used(dim, false);
    const auto recurse = [&](const auto& self, std::size_t remaining) -> BigInt {
        if (remaining == 0) return 1;
        std::size_t l = 0;
        while (used[l]) ++l;
        used[l] = true;
        BigInt total = 0;
        for (std::size_t t = l + 1; t < dim; ++t) {
            if (used[t] || cov[l][t] == 0) continue;
            used[t] = true;
            total += cov[l][t] * self(self, remaining - 2);
            used[t] = false;
        }
        used[l] = false;
        return total;
    };
    return recurse(recurse, dim);
}

std::vector<std::vector<int>> cyclic_covariance(const EntryClassMap& companion_map,
                                                std::span<const std::uint32_t> pattern) {
    if (companion_map.kind() != MapKind::Companion)
        throw std::invalid_argument("cyclic_covariance: class map is not of companion kind");
    const std::size_t m = pattern.size();
    for (const auto r : pattern)
        if (r >= companion_map.size())
            throw std::invalid_argument("cyclic_covariance: pattern entry out of range");

    std::vector<EntryRef> refs(m);
    for (std::size_t l = 0; l < m; ++l)
        refs[l] = companion_map.at(pattern[l], pattern[(l + 1) % m]);

    std::vector<std::vector<int>> cov(m, std::vector<int>(m, 0));
    for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t t = l + 1; t < m; ++t) {
            if (refs[l].class_id != refs[t].class_id) continue;
            const bool real = companion_map.class_kind(refs[l].class_id) == ClassKind::RealGaussian;
            if (real || refs[l].conjugated != refs[t].conjugated) cov[l][t] = cov[t][l] = 1;
        }
    }
    return cov;
}

ExactMoment companion_moment_exact(const LinkFunction& f, std::size_t K, unsigned m,
                                   PatternMode mode, unsigned workers) {
    if (K == 0 || K % f.k() != 0)
        throw std::invalid_argument("companion size K must be a positive multiple of the period k");
    if (m == 0) return ExactMoment(BigRational(1));
    if (m % 2 != 0) return ExactMoment(BigRational(0));
    if (m > kMaxCyclicLength) throw BudgetError("cyclic products longer than 32 are not supported");
    check_step_budget(K, m);

    const EntryClassMap map = build_companion_classes(f, K);
    const CompanionView view(map);

    const std::uint64_t tuple_count = detail::checked_pow(K, m, kExactStepBudget);
    workers = std::max(1u, workers);

    const auto run_range = [&](std::uint64_t begin, std::uint64_t end) -> std::uint64_t {
        std::vector<std::uint32_t> t(m);
        std::uint64_t index = begin;
        for (unsigned l = m; l-- > 0;) {
            t[l] = static_cast<std::uint32_t>(index % K);
            index /= K;
        }
        std::uint64_t sum = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            if (mode == PatternMode::Full) {
                sum += view.cyclic_expectation(t);
            } else if (detail::is_min_rotation(t)) {
                sum += detail::orbit_size(t) * view.cyclic_expectation(t);
            }
            for (unsigned l = m; l-- > 0;) {
                if (++t[l] < K) break;
                t[l] = 0;
            }
        }
        return sum;
    };

    std::uint64_t total = 0;
    if (workers == 1 || tuple_count < 4096) {
        total = run_range(0, tuple_count);
    } else {
        std::vector<std::uint64_t> partial(workers, 0);
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = tuple_count * w / workers;
            const std::uint64_t end = tuple_count * (w + 1) / workers;
            threads.emplace_back([&, w, begin, end] { partial[w] = run_range(begin, end); });
        }
        for (auto& th : threads) th.join();
        for (const auto p : partial) total += p;
    }

    return ExactMoment(BigInt(total), integer_pow(K, 1 + m / 2));
}

ExactMoment limit_moment_via_matchings(const LinkFunction& f, unsigned m) {
    const std::size_t k = f.k();
    if (m == 0) return ExactMoment(BigRational(1));
    if (m % 2 != 0) return ExactMoment(BigRational(0));
    if (m > kMaxCyclicLength) throw BudgetError("cyclic products longer than 32 are not supported");
    check_step_budget(k, m);

    const PairCompatibility compat(f);

    std::uint64_t survivors = 0;
    const auto count_matchings = [&](std::span<const std::uint32_t> p) {
        // rows[l]: positions t pairable with l (difference negation built
        // into the compatibility table).
        std::uint32_t rows[kMaxCyclicLength] = {};
        for (unsigned l = 0; l < m; ++l) {
            for (unsigned t = l + 1; t < m; ++t) {
                if (compat.ok(p[l], p[(l + 1) % m], p[t], p[(t + 1) % m])) {
                    rows[l] |= std::uint32_t{1} << t;
                    rows[t] |= std::uint32_t{1} << l;
                }
            }
        }
        return count_pairings(rows, (std::uint32_t{1} << m) - 1);
    };
    for_each_pattern(k, m, PatternMode::Full,
                     [&](std::span<const std::uint32_t> p, std::uint64_t) {
                         survivors += count_matchings(p);
                     });

    return ExactMoment(BigInt(survivors), integer_pow(k, 1 + m / 2));
}

DifferenceProfile difference_profile(std::span<const std::uint32_t> pattern, std::size_t k) {
    DifferenceProfile profile;
    profile.k = k;
    profile.sets.assign(k, {});
    const std::size_t m = pattern.size();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t d = (pattern[j] % k + k - pattern[(j + 1) % m] % k) % k;
        profile.sets[d].push_back(static_cast<std::uint32_t>(j));
    }
    profile.matchable = true;
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t opposite = (k - r) % k;
        if (r == opposite) {
            if (profile.sets[r].size() % 2 != 0) profile.matchable = false;
        } else if (profile.sets[r].size() != profile.sets[opposite].size()) {
            profile.matchable = false;
        }
    }
    return profile;
}

BigInt closed_form_matching_count(std::span<const std::uint32_t> pattern, std::size_t k) {
    if (pattern.size() % 2 != 0)
        throw std::invalid_argument("closed_form_matching_count: pattern length must be even");
    const DifferenceProfile profile = difference_profile(pattern, k);
    if (!profile.matchable) return 0;

    BigInt count = double_factorial(static_cast<long long>(profile.sets[0].size()) - 1);
    if (k % 2 == 0) count *= double_factorial(static_cast<long long>(profile.sets[k / 2].size()) - 1);
    for (std::size_t r = 1; 2 * r < k; ++r) {
        BigInt factorial = 1;
        for (std::size_t v = 2; v <= profile.sets[r].size(); ++v) factorial *= v;
        count *= factorial;
    }
    return count;
}

BigInt moment_bound(std::size_t k, unsigned m) {
    if (m == 0 || m % 2 != 0)
        throw std::invalid_argument("moment_bound: order must be a positive even integer");
    return integer_pow(k, m / 2 - 1) * double_factorial(static_cast<long long>(m) - 1);
}

std::vector<double> carleman_partial_sums(std::size_t k, unsigned max_order) {
    if (max_order == 0)
        throw std::invalid_argument("carleman_partial_sums: need at least one order");
    std::vector<double> sums;
    sums.reserve(max_order);
    double acc = 0.0;
    const double log_k = std::log(static_cast<double>(k));
    double log_df = 0.0;  // log (m-1)!! accumulated over even m
    for (unsigned i = 1; i <= max_order; ++i) {
        const unsigned m = 2 * i;
        log_df += std::log(static_cast<double>(m - 1));
        const double log_bound = log_k * (static_cast<double>(m) / 2.0 - 1.0) + log_df;
        acc += std::exp(-log_bound / static_cast<double>(m));
        sums.push_back(acc);
    }
    return sums;
}

}  // namespace pme
