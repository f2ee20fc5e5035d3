#include "pme/entry_classes.hpp"

#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "pme/union_find.hpp"

namespace pme {

namespace {

void require_divides(std::size_t k, std::size_t n) {
    if (n == 0 || n % k != 0) {
        throw std::invalid_argument("ensemble size " + std::to_string(n) +
                                    " is not a positive multiple of the link period " +
                                    std::to_string(k));
    }
}

// Slot id for (wrapped diagonal d, row residue r): every position (i, i+d)
// with i = r (mod k) shares the link value f(r, r+d), so one slot per (d, r)
// is the finest useful granularity.
inline std::size_t slot(std::size_t d, std::size_t r, std::size_t k) { return d * k + r; }

}  // namespace

std::vector<std::size_t> EntryClassMap::class_sizes() const {
    std::vector<std::size_t> sizes(class_kinds_.size(), 0);
    for (const auto id : class_ids_) ++sizes[id];
    return sizes;
}

void EntryClassMap::write_csv(std::ostream& out) const {
    out << "i,j,class_id,conjugated,kind\n";
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            const auto ref = at(i, j);
            const char* kind =
                class_kinds_[ref.class_id] == ClassKind::RealGaussian ? "real-gaussian"
                                                                      : "complex-gaussian";
            out << i << ',' << j << ',' << ref.class_id << ',' << (ref.conjugated ? 1 : 0) << ','
                << kind << '\n';
        }
    }
}

EntryClassMap build_real_classes(const LinkFunction& f, std::size_t n) {
    const std::size_t k = f.k();
    require_divides(k, n);

    DisjointSets sets(n * k);
    std::vector<std::size_t> first_with_value(k);
    for (std::size_t d = 0; d < n; ++d) {
        // Equal link values on one wrapped diagonal collapse to one slot.
        std::fill(first_with_value.begin(), first_with_value.end(), SIZE_MAX);
        for (std::size_t r = 0; r < k; ++r) {
            const std::uint32_t v = f.at(r, (r + d) % k);
            if (first_with_value[v] == SIZE_MAX) {
                first_with_value[v] = r;
            } else {
                sets.unite(slot(d, first_with_value[v], k), slot(d, r, k));
            }
        }
        // Transpose of (i, i+d) lies on diagonal -d with row residue r+d.
        for (std::size_t r = 0; r < k; ++r) {
            sets.unite(slot(d, r, k), slot((n - d) % n, (r + d) % k, k));
        }
    }

    EntryClassMap map;
    map.n_ = n;
    map.k_ = k;
    map.kind_ = MapKind::Real;
    map.link_descriptor_ = f.descriptor();
    map.class_ids_.resize(n * n);
    map.conjugated_.assign(n * n, 0);
    std::unordered_map<std::size_t, std::uint32_t> dense;
    dense.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t root = sets.find(slot(wrapped_diagonal_index(i, j, n), i % k, k));
            auto [it, inserted] = dense.emplace(root, static_cast<std::uint32_t>(dense.size()));
            map.class_ids_[i * n + j] = it->second;
        }
    }
    map.class_kinds_.assign(dense.size(), ClassKind::RealGaussian);
    return map;
}

EntryClassMap build_companion_classes(const LinkFunction& f, std::size_t n) {
    const std::size_t k = f.k();
    require_divides(k, n);

    ParityDisjointSets sets(n * k);
    std::vector<std::size_t> first_with_value(k);
    for (std::size_t d = 0; d < n; ++d) {
        std::fill(first_with_value.begin(), first_with_value.end(), SIZE_MAX);
        for (std::size_t r = 0; r < k; ++r) {
            const std::uint32_t v = f.at(r, (r + d) % k);
            if (first_with_value[v] == SIZE_MAX) {
                first_with_value[v] = r;
            } else {
                sets.unite(slot(d, first_with_value[v], k), slot(d, r, k), 0);
            }
        }
        for (std::size_t r = 0; r < k; ++r) {
            sets.unite(slot(d, r, k), slot((n - d) % n, (r + d) % k, k), 1);
        }
    }

    EntryClassMap map;
    map.n_ = n;
    map.k_ = k;
    map.kind_ = MapKind::Companion;
    map.link_descriptor_ = f.descriptor();
    map.class_ids_.resize(n * n);
    map.conjugated_.assign(n * n, 0);
    std::unordered_map<std::size_t, std::uint32_t> dense;
    dense.reserve(n * k);
    std::vector<ClassKind> kinds;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t s = slot(wrapped_diagonal_index(i, j, n), i % k, k);
            const std::size_t root = sets.find(s);
            auto [it, inserted] = dense.emplace(root, static_cast<std::uint32_t>(dense.size()));
            if (inserted) {
                kinds.push_back(sets.annihilated(root) ? ClassKind::RealGaussian
                                                       : ClassKind::ComplexGaussian);
            }
            map.class_ids_[i * n + j] = it->second;
            if (kinds[it->second] == ClassKind::ComplexGaussian) {
                map.conjugated_[i * n + j] = sets.rel(s);
            }
        }
    }
    map.class_kinds_ = std::move(kinds);

    // Hermitian sanity: transposed positions of a complex class must sit in
    // opposite conjugate halves. A violation here is a bug, not bad input.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const auto a = map.at(i, j);
            const auto b = map.at(j, i);
            if (a.class_id != b.class_id)
                throw std::logic_error("companion class map: transpose split a class");
            if (map.class_kinds_[a.class_id] == ClassKind::ComplexGaussian &&
                a.conjugated == b.conjugated)
                throw std::logic_error(
                    "companion class map: inconsistent conjugation in a complex class");
        }
    }
    return map;
}

PairCompatibility::PairCompatibility(const LinkFunction& f) : k_(f.k()), ok_(k_ * k_ * k_ * k_, 0) {
    // One 2k-slot closure per residue difference delta: side 0 holds the row
    // residues of a generic diagonal d = delta (mod k), side 1 those of -d.
    // The construction only depends on delta, not on the generic d realizing
    // it.
    std::vector<std::size_t> first_with_value(k_);
    for (std::size_t delta = 0; delta < k_; ++delta) {
        DisjointSets sets(2 * k_);
        for (std::size_t side = 0; side < 2; ++side) {
            std::fill(first_with_value.begin(), first_with_value.end(), SIZE_MAX);
            for (std::size_t r = 0; r < k_; ++r) {
                const std::size_t col =
                    side == 0 ? (r + delta) % k_ : (r + k_ - delta) % k_;
                const std::uint32_t v = f.at(r, col);
                if (first_with_value[v] == SIZE_MAX) {
                    first_with_value[v] = r;
                } else {
                    sets.unite(side * k_ + first_with_value[v], side * k_ + r);
                }
            }
        }
        for (std::size_t r = 0; r < k_; ++r) {
            sets.unite(r, k_ + (r + delta) % k_);
        }
        for (std::size_t r_l = 0; r_l < k_; ++r_l) {
            const std::size_t r_l1 = (r_l + delta) % k_;
            for (std::size_t r_t = 0; r_t < k_; ++r_t) {
                const std::size_t r_t1 = (r_t + k_ - delta) % k_;  // difference negation
                if (sets.same(r_l, k_ + r_t)) {
                    ok_[((r_l * k_ + r_l1) * k_ + r_t) * k_ + r_t1] = 1;
                }
            }
        }
    }
}

}  // namespace pme
