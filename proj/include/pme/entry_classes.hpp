#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pme/link_function.hpp"

namespace pme {

enum class MapKind { Real, Companion };
enum class ClassKind { RealGaussian, ComplexGaussian };

struct EntryRef {
    std::uint32_t class_id;
    bool conjugated;
};

/// Index of the wrapped diagonal through (i, j): (j - i) mod N.
inline std::size_t wrapped_diagonal_index(std::size_t i, std::size_t j, std::size_t n) {
    return (j + n - i) % n;
}

/// Partition of the N x N matrix positions into equality classes.
///
/// Real kind: class ids are closed under transposition and under
/// same-wrapped-diagonal equal-link-value; conjugation flags are all false.
///
/// Companion kind: classes additionally carry a distribution kind. Complex
/// classes come in conjugate halves (the flag says which half a position is
/// in, with transposed positions always in opposite halves); classes where
/// the closure forces an entry equal to its own conjugate are real and
/// carry no flags.
class EntryClassMap {
  public:
    std::size_t size() const { return n_; }
    MapKind kind() const { return kind_; }
    std::size_t class_count() const { return class_kinds_.size(); }
    std::size_t link_period() const { return k_; }
    const std::string& link_descriptor() const { return link_descriptor_; }

    EntryRef at(std::size_t i, std::size_t j) const {
        const std::size_t p = i * n_ + j;
        return {class_ids_[p], conjugated_[p] != 0};
    }

    ClassKind class_kind(std::uint32_t class_id) const { return class_kinds_[class_id]; }

    /// Positions per class; sizes sum to N^2.
    std::vector<std::size_t> class_sizes() const;

    /// CSV rows "i,j,class_id,conjugated,kind" (kind per the class).
    void write_csv(std::ostream& out) const;

  private:
    friend EntryClassMap build_real_classes(const LinkFunction&, std::size_t);
    friend EntryClassMap build_companion_classes(const LinkFunction&, std::size_t);

    std::size_t n_ = 0;
    std::size_t k_ = 1;
    MapKind kind_ = MapKind::Real;
    std::string link_descriptor_;
    std::vector<std::uint32_t> class_ids_;   // row-major N x N
    std::vector<std::uint8_t> conjugated_;   // row-major N x N
    std::vector<ClassKind> class_kinds_;     // per class id
};

/// Finest partition of positions closed under (i,j)~(j,i) and under
/// equality of link values on a common wrapped diagonal. Requires k | N.
EntryClassMap build_real_classes(const LinkFunction& f, std::size_t n);

/// Conjugation-aware closure for the Hermitian companion: (i,j) is
/// conjugate-linked to (j,i) and equal-linked along wrapped diagonals with
/// equal link values. A class is real exactly when the closure forces some
/// member equal to its own conjugate. Requires k | N.
EntryClassMap build_companion_classes(const LinkFunction& f, std::size_t n);

/// Asymptotic pair-compatibility of two cyclic-product slots: quadruples
/// (r_l, r_l1, r_t, r_t1) of residues mod k for which the entry at row
/// residue r_l on a generic wrapped diagonal d = r_l1 - r_l and the entry
/// at row residue r_t on the transposed diagonal -d land in one class of
/// the real ensemble. Quadruples whose residue differences do not negate
/// are never compatible.
class PairCompatibility {
  public:
    explicit PairCompatibility(const LinkFunction& f);

    std::size_t k() const { return k_; }

    bool ok(std::uint32_t r_l, std::uint32_t r_l1, std::uint32_t r_t, std::uint32_t r_t1) const {
        return ok_[((static_cast<std::size_t>(r_l) * k_ + r_l1) * k_ + r_t) * k_ + r_t1];
    }

  private:
    std::size_t k_;
    std::vector<std::uint8_t> ok_;  // k^4 lookup
};

}  // namespace pme
