#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pme/entry_classes.hpp"
#include "pme/link_function.hpp"

namespace pme {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Thrown when an exact enumeration would exceed the elementary-step budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Elementary-step budget for exact enumerations (tuples times pairings).
/// k <= 3 with m <= 8, and k <= 20 with m <= 4, fit comfortably.
constexpr std::uint64_t kExactStepBudget = 1'000'000'000ull;

/// Exact rational value of a spectral moment.
class ExactMoment {
  public:
    ExactMoment() = default;
    explicit ExactMoment(BigRational value) : value_(std::move(value)) {}
    ExactMoment(const BigInt& num, const BigInt& den) : value_(num, den) {}

    const BigRational& value() const { return value_; }
    BigInt numerator() const { return boost::multiprecision::numerator(value_); }
    BigInt denominator() const { return boost::multiprecision::denominator(value_); }
    double to_double() const { return value_.convert_to<double>(); }
    std::string to_string() const;

    bool operator==(const ExactMoment&) const = default;

  private:
    BigRational value_;
};

enum class PatternMode { Full, CyclicReduced };

/// k^length tuples over Z/kZ, each exactly once in Full mode; in
/// CyclicReduced mode only lexicographically-minimal rotations, with the
/// orbit size passed as multiplicity. fn(residues, multiplicity).
template <typename Fn>
void for_each_pattern(std::size_t k, unsigned length, PatternMode mode, Fn&& fn);

/// n!! with the convention (-1)!! = 0!! = 1.
BigInt double_factorial(long long n);

/// Wick pairing sum: over all pair partitions of the index set, the product
/// of pairwise covariances. cov must be square and symmetric; an odd
/// dimension returns 0 (odd Gaussian moments vanish) with a note on stderr.
BigInt isserlis_expectation(const std::vector<std::vector<int>>& cov);

/// {0,1} covariance matrix of the cyclic product c[p0,p1] c[p1,p2] ...
/// c[p_last,p0] of companion entries: 1 where two factors are the same
/// real draw or a conjugate pair of the same complex draw.
std::vector<std::vector<int>> cyclic_covariance(const EntryClassMap& companion_map,
                                                std::span<const std::uint32_t> pattern);

/// Exact moment of order m of the empirical spectral measure of the K x K
/// companion ensemble: Wick expectations of all K^m cyclic products over
/// K^(1+m/2). Requires k | K; zero for odd m.
ExactMoment companion_moment_exact(const LinkFunction& f, std::size_t K, unsigned m,
                                   PatternMode mode = PatternMode::CyclicReduced,
                                   unsigned workers = 1);

/// The same moment computed from the limit combinatorics of the real
/// ensemble: over all patterns in (Z/kZ)^m, each pair matching whose pairs
/// all satisfy difference negation and pair compatibility contributes
/// (1/k)^(1+m/2). Zero for odd m.
ExactMoment limit_moment_via_matchings(const LinkFunction& f, unsigned m);

/// Multiplicities of the residue differences r_j - r_{j+1} (cyclically)
/// of a pattern, the shape the closed-form matching count is read from.
struct DifferenceProfile {
    std::size_t k = 1;
    std::vector<std::vector<std::uint32_t>> sets;  // sets[r] = positions j with difference r
    bool matchable = false;  // |S_0| and |S_{k/2}| even, |S_r| == |S_{-r}| otherwise
};

DifferenceProfile difference_profile(std::span<const std::uint32_t> pattern, std::size_t k);

/// Closed-form matching count read off the difference profile:
/// (|S_0|-1)!! (|S_{k/2}|-1)!! prod n_r!. Diagnostic only; it ignores pair
/// compatibility and can overcount (the conformance-aware enumeration in
/// limit_moment_via_matchings is the ground truth).
BigInt closed_form_matching_count(std::span<const std::uint32_t> pattern, std::size_t k);

/// Upper bound k^(m/2-1) (m-1)!! on the order-m companion moment, m even.
BigInt moment_bound(std::size_t k, unsigned m);

/// Partial sums of bound^(-1/m) over even orders m = 2, 4, ..., 2*max_order.
/// Divergence of the series pins the moment problem to a unique measure.
std::vector<double> carleman_partial_sums(std::size_t k, unsigned max_order);

// --- template implementation ---

namespace detail {

std::uint64_t checked_pow(std::size_t base, unsigned exp, std::uint64_t cap);

inline bool is_min_rotation(std::span<const std::uint32_t> t) {
    const std::size_t m = t.size();
    for (std::size_t s = 1; s < m; ++s) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::uint32_t a = t[(i + s) % m];
            if (a != t[i]) {
                if (a < t[i]) return false;
                break;
            }
        }
    }
    return true;
}

inline std::uint64_t orbit_size(std::span<const std::uint32_t> t) {
    const std::size_t m = t.size();
    for (std::size_t p = 1; p < m; ++p) {
        if (m % p != 0) continue;
        bool fixed = true;
        for (std::size_t i = 0; i < m && fixed; ++i) fixed = t[(i + p) % m] == t[i];
        if (fixed) return p;
    }
    return m;
}

}  // namespace detail

template <typename Fn>
void for_each_pattern(std::size_t k, unsigned length, PatternMode mode, Fn&& fn) {
    if (k == 0) throw std::invalid_argument("for_each_pattern: k must be >= 1");
    detail::checked_pow(k, length, kExactStepBudget);  // enumeration cap
    std::vector<std::uint32_t> t(length, 0);
    if (length == 0) {
        fn(std::span<const std::uint32_t>(t), std::uint64_t{1});
        return;
    }
    while (true) {
        if (mode == PatternMode::Full) {
            fn(std::span<const std::uint32_t>(t), std::uint64_t{1});
        } else if (detail::is_min_rotation(t)) {
            fn(std::span<const std::uint32_t>(t), detail::orbit_size(t));
        }
        // odometer, most significant digit first
        std::size_t pos = length;
        while (pos > 0) {
            --pos;
            if (++t[pos] < k) break;
            t[pos] = 0;
            if (pos == 0) return;
        }
    }
}

}  // namespace pme
