#include "pme/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace pme {

namespace {

template <typename Matrix>
void check_hermitian(const Matrix& h) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("hermitian_eigenvalues: matrix is not square");
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = i; j < h.cols(); ++j) {
            using std::conj;
            if (h(i, j) != conj(h(j, i)))
                throw std::invalid_argument("hermitian_eigenvalues: matrix is not Hermitian");
        }
    }
}

// Householder reduction to real symmetric tridiagonal form, lower triangle,
// one reflector per column with the off-diagonal result chosen real.
template <typename Matrix>
void householder_tridiagonalize(Matrix a, Eigen::VectorXd& diag, Eigen::VectorXd& sub) {
    using Scalar = typename Matrix::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = a.rows();
    diag.resize(n);
    sub.resize(n > 0 ? n - 1 : 0);

    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        auto column = a.col(k).segment(k + 1, n - k - 1);
        const Scalar alpha = column(0);
        const double tail_norm = column.size() > 1 ? column.tail(column.size() - 1).norm() : 0.0;
        if (tail_norm == 0.0 && std::imag(Scalar(alpha)) == 0.0) {
            sub(k) = std::real(alpha);
            continue;
        }
        const double beta =
            -std::copysign(std::sqrt(std::norm(alpha) + tail_norm * tail_norm), std::real(alpha));
        const Scalar tau = (Scalar(beta) - alpha) / beta;

        Vector v(column.size());
        v(0) = Scalar(1);
        if (column.size() > 1) v.tail(column.size() - 1) = column.tail(column.size() - 1) / (alpha - Scalar(beta));

        auto trailing = a.block(k + 1, k + 1, n - k - 1, n - k - 1);
        Vector w = tau * (trailing.template selfadjointView<Eigen::Lower>() * v);
        w -= (tau * Scalar(0.5) * (w.adjoint() * v)(0)) * v;
        trailing.template selfadjointView<Eigen::Lower>().rankUpdate(v, w, Scalar(-1));

        sub(k) = beta;
    }
    for (Eigen::Index i = 0; i < n; ++i) diag(i) = std::real(a(i, i));
}

// Implicit-shift QL sweeps on a symmetric tridiagonal matrix; at most 30
// sweeps per eigenvalue. e must have the same length as d; its last slot is
// scratch for the sweep that starts past the final subdiagonal.
void ql_implicit_shift(Eigen::VectorXd& d, Eigen::VectorXd& e) {
    const Eigen::Index n = d.size();
    if (n < 2) return;
    constexpr int kMaxSweeps = 30;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (Eigen::Index l = 0; l < n; ++l) {
        int sweeps = 0;
        while (true) {
            Eigen::Index m = l;
            for (; m + 1 < n; ++m) {
                const double dd = std::abs(d(m)) + std::abs(d(m + 1));
                if (std::abs(e(m)) <= eps * dd) break;
            }
            if (m == l) break;
            if (++sweeps > kMaxSweeps)
                throw std::runtime_error(
                    "hermitian_eigenvalues: QL iteration exceeded the 30-sweep cap");
            double g = (d(l + 1) - d(l)) / (2.0 * e(l));
            double r = std::hypot(g, 1.0);
            g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            for (Eigen::Index i = m - 1; i >= l; --i) {
                double f = s * e(i);
                const double b = c * e(i);
                r = std::hypot(f, g);
                e(i + 1) = r;
                if (r == 0.0) {
                    d(i + 1) -= p;
                    e(m) = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d(i + 1) - p;
                r = (d(i) - g) * s + 2.0 * c * b;
                p = s * r;
                d(i + 1) = g + p;
                g = c * r - b;
                if (i == l) {
                    d(l) -= p;
                    e(l) = g;
                    e(m) = 0.0;
                }
            }
        }
    }
}

template <typename Matrix>
std::vector<double> solve_hermitian(const Matrix& h, double tol) {
    check_hermitian(h);
    Eigen::VectorXd diag, sub;
    householder_tridiagonalize(h, diag, sub);
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(diag.size());
    padded.head(sub.size()) = sub;
    ql_implicit_shift(diag, padded);

    std::vector<double> eigs(diag.data(), diag.data() + diag.size());
    std::sort(eigs.begin(), eigs.end());

    double sum = 0.0, sum_sq = 0.0;
    for (const double v : eigs) {
        sum += v;
        sum_sq += v * v;
    }
    const double trace = std::real(h.trace());
    const double frob_sq = h.squaredNorm();
    const double frob = std::sqrt(frob_sq);
    if (std::abs(sum - trace) > tol * std::max(frob, 1.0) ||
        std::abs(sum_sq - frob_sq) > tol * std::max(frob_sq, 1.0))
        throw std::runtime_error("hermitian_eigenvalues: trace identities violated beyond tolerance");
    return eigs;
}

}  // namespace

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXd& h, double tol) {
    return solve_hermitian(h, tol);
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& h, double tol) {
    return solve_hermitian(h, tol);
}

std::vector<std::complex<double>> circulant_eigenvalues_oracle(const std::vector<double>& first_row) {
    const std::size_t n = first_row.size();
    std::vector<std::complex<double>> eigs(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        const std::complex<double> zeta(std::cos(angle), std::sin(angle));
        std::complex<double> acc = 0.0;
        std::complex<double> power = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += first_row[i] * power;
            power *= zeta;
        }
        eigs[j] = acc;
    }
    return eigs;
}

SpectralSample normalized_spectrum(std::vector<double> eigs, std::size_t n, Provenance provenance) {
    if (eigs.size() != n)
        throw std::invalid_argument("normalized_spectrum: expected " + std::to_string(n) +
                                    " eigenvalues, got " + std::to_string(eigs.size()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& v : eigs) v *= scale;
    std::sort(eigs.begin(), eigs.end());
    return {n, std::move(eigs), std::move(provenance)};
}

double spectral_moment(const SpectralSample& sample, unsigned m) {
    if (sample.values.empty()) return m == 0 ? 1.0 : 0.0;
    double acc = 0.0;
    for (const double v : sample.values) {
        double p = 1.0;
        for (unsigned e = 0; e < m; ++e) p *= v;
        acc += p;
    }
    return acc / static_cast<double>(sample.values.size());
}

double HistogramTable::density(std::size_t bin) const {
    if (total == 0) return 0.0;
    const double width = (hi - lo) / static_cast<double>(counts.size());
    return static_cast<double>(counts[bin]) / (static_cast<double>(total) * width);
}

HistogramTable histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi) {
    if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
    if (!(lo < hi)) throw std::invalid_argument("histogram: invalid range, need lo < hi");

    HistogramTable table;
    table.lo = lo;
    table.hi = hi;
    table.counts.assign(bins, 0);
    table.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) table.edges[b] = lo + width * static_cast<double>(b);
    table.edges[bins] = hi;

    for (const double v : values) {
        if (v < lo) {
            ++table.below_lo;
        } else if (v > hi) {
            ++table.above_hi;
        } else {
            auto b = static_cast<std::size_t>((v - lo) / width);
            if (b >= bins) b = bins - 1;  // v == hi closes the last bin
            ++table.counts[b];
        }
    }
    table.total = values.size();
    return table;
}

std::size_t fd_bin_count(std::vector<double> values, double lo, double hi) {
    if (values.size() < 4) return 64;
    std::sort(values.begin(), values.end());
    const auto quartile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto idx = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(idx);
        return idx + 1 < values.size() ? values[idx] * (1.0 - frac) + values[idx + 1] * frac
                                       : values[idx];
    };
    const double iqr = quartile(0.75) - quartile(0.25);
    if (!(iqr > 0.0)) return 64;
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
    const double count = (hi - lo) / width;
    if (!(count >= 1.0)) return 1;
    return std::min<std::size_t>(static_cast<std::size_t>(std::ceil(count)), 512);
}

void write_histogram_csv(const HistogramTable& table, std::ostream& out) {
    out << "bin_lo,bin_hi,count,density\n";
    char line[128];
    for (std::size_t b = 0; b < table.counts.size(); ++b) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%zu,%.17g\n", table.edges[b],
                      table.edges[b + 1], table.counts[b], table.density(b));
        out << line;
    }
}

}  // namespace pme
