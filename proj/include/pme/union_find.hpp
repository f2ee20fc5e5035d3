#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace pme {

/// Disjoint-set union with path compression and union by size.
class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    /// Returns true if the two elements were in different sets.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// Disjoint-set union where every edge carries a parity bit (0 = equal,
/// 1 = conjugate). Each element tracks its parity relative to its root.
/// Merging two elements already in one set with an inconsistent parity
/// does not fail; it marks the component "annihilated" (an element was
/// forced equal to its own conjugate), which callers read back per root.
class ParityDisjointSets {
  public:
    explicit ParityDisjointSets(std::size_t n)
        : parent_(n), rel_(n, 0), size_(n, 1), annihilated_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    /// Root of v's set; after compression rel(v) is v's parity to the root.
    std::size_t find(std::size_t v) {
        if (parent_[v] == v) return v;
        const std::size_t root = find(parent_[v]);
        rel_[v] ^= rel_[parent_[v]];
        parent_[v] = root;
        return root;
    }

    /// Parity of v relative to its root.
    std::uint8_t rel(std::size_t v) {
        find(v);
        return rel_[v];
    }

    void unite(std::size_t a, std::size_t b, std::uint8_t parity) {
        const std::size_t ra = find(a), rb = find(b);
        if (ra == rb) {
            if ((rel_[a] ^ rel_[b]) != parity) annihilated_[ra] = 1;
            return;
        }
        std::size_t big = ra, small = rb;
        std::uint8_t rel_small = rel_[a] ^ rel_[b] ^ parity;
        if (size_[big] < size_[small]) std::swap(big, small);
        parent_[small] = big;
        rel_[small] = rel_small;
        size_[big] += size_[small];
        annihilated_[big] |= annihilated_[small];
    }

    bool annihilated(std::size_t v) { return annihilated_[find(v)] != 0; }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::uint8_t> rel_;
    std::vector<std::size_t> size_;
    std::vector<std::uint8_t> annihilated_;
};

}  // namespace pme
