#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pme {

/// Mathematical modulus: result always in [0, m) for m > 0.
constexpr long long math_mod(long long a, long long m) {
    long long r = a % m;
    return r < 0 ? r + m : r;
}

/// A k-link function: a map (Z/kZ)^2 -> Z/kZ stored as an explicit k x k
/// table. Entry (i, j) gives the value at (i mod k, j mod k); integer
/// arguments are reduced with the mathematical modulus, so negative
/// indices wrap into [0, k).
///
/// Immutable after construction; safe to share between threads.
class LinkFunction {
  public:
    /// Builds from an explicit table. Throws std::invalid_argument if the
    /// table is not k x k or contains a value >= k.
    LinkFunction(std::size_t k, const std::vector<std::vector<std::uint32_t>>& table);

    /// f(i, j) = i mod k; every wrapped diagonal repeats with period k.
    static LinkFunction block_circulant(std::size_t k);

    /// f(i, j) = (i - j) * i mod 2.
    static LinkFunction example_f2();

    /// f(i, j) = (i - j + 1) * i mod 2.
    static LinkFunction example_f3();

    /// Parses the canonical JSON document {"k": <int>, "table": [[...], ...]}.
    /// Malformed documents, non-k-by-k tables and out-of-range values are
    /// rejected with distinct diagnostics.
    static LinkFunction parse(const std::string& text);

    /// Canonical JSON serialization; parse(serialize()) round-trips exactly.
    std::string serialize() const;

    std::size_t k() const { return k_; }

    /// Evaluate at any pair of integers (quotient-map semantics).
    std::uint32_t operator()(long long i, long long j) const {
        return table_[static_cast<std::size_t>(math_mod(i, static_cast<long long>(k_))) * k_ +
                      static_cast<std::size_t>(math_mod(j, static_cast<long long>(k_)))];
    }

    /// Direct table access, 0 <= i, j < k.
    std::uint32_t at(std::size_t i, std::size_t j) const { return table_[i * k_ + j]; }

    /// Short provenance tag carried into sample metadata ("builtin:f2",
    /// "builtin:block:4", or "custom:k=<k>" for parsed tables).
    const std::string& descriptor() const { return descriptor_; }
    void set_descriptor(std::string d) { descriptor_ = std::move(d); }

    bool operator==(const LinkFunction& other) const {
        return k_ == other.k_ && table_ == other.table_;
    }

  private:
    LinkFunction(std::size_t k, std::vector<std::uint32_t> flat, std::string descriptor);

    std::size_t k_;
    std::vector<std::uint32_t> table_;  // row-major k x k
    std::string descriptor_;
};

}  // namespace pme
