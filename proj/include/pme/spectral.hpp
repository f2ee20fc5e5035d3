#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "pme/sampler.hpp"

namespace pme {

/// Eigenvalues of one sampled matrix normalized by sqrt(N), ascending.
struct SpectralSample {
    std::size_t n = 0;
    std::vector<double> values;
    Provenance provenance;
};

struct HistogramTable {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> edges;        // bins + 1 uniform edges
    std::vector<std::size_t> counts;  // per bin
    std::size_t below_lo = 0;
    std::size_t above_hi = 0;
    std::size_t total = 0;  // counts + overflow
    bool normalized = true; // densities integrate to the in-range mass share

    double density(std::size_t bin) const;
};

/// Ascending eigenvalues of a real symmetric matrix. The input must be
/// exactly symmetric; the result satisfies the trace identities
/// |sum(l) - tr H| <= tol*||H||_F and |sum(l^2) - ||H||_F^2| <= tol*||H||_F^2.
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXd& h, double tol = 1e-10);

/// Same contract for an exactly Hermitian complex matrix.
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& h, double tol = 1e-10);

/// Eigenvalues of the circulant matrix with the given first row, one per
/// N-th root of unity z: sum_i row[i] * z^i. Real up to roundoff when the
/// circulant is symmetric.
std::vector<std::complex<double>> circulant_eigenvalues_oracle(const std::vector<double>& first_row);

/// Divides by sqrt(N) and sorts ascending. Throws if eigs.size() != n.
SpectralSample normalized_spectrum(std::vector<double> eigs, std::size_t n,
                                   Provenance provenance = {});

/// (1/N) sum values^m.
double spectral_moment(const SpectralSample& sample, unsigned m);

/// Uniform binning over [lo, hi]; out-of-range values land in the overflow
/// fields. Requires bins >= 1 and lo < hi.
HistogramTable histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi);

/// Freedman-Diaconis bin count for the given range, clamped to [1, 512];
/// falls back to 64 bins when the rule degenerates.
std::size_t fd_bin_count(std::vector<double> values, double lo, double hi);

/// CSV rows "bin_lo,bin_hi,count,density".
void write_histogram_csv(const HistogramTable& table, std::ostream& out);

}  // namespace pme
