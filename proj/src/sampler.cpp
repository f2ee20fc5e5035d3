#include "pme/sampler.hpp"

#include <stdexcept>
#include <vector>

namespace pme {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

}  // namespace

SampledRealMatrix sample_real_matrix(const EntryClassMap& map, EntryDistribution dist,
                                     std::uint64_t master_seed, std::uint64_t sample_index) {
    if (map.kind() != MapKind::Real)
        throw std::invalid_argument("sample_real_matrix: class map is not of real kind");

    const auto n = static_cast<Eigen::Index>(map.size());
    std::vector<double> draws(map.class_count());
    for (std::size_t c = 0; c < draws.size(); ++c) {
        RandomStream stream(master_seed, sample_index, c);
        draws[c] = stream.draw(dist);
    }

    SampledRealMatrix sample;
    sample.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            sample.entries(i, j) = draws[map.at(static_cast<std::size_t>(i),
                                                static_cast<std::size_t>(j)).class_id];
        }
    }
    sample.provenance = {master_seed, sample_index, to_string(dist), map.link_descriptor()};
    return sample;
}

SampledComplexMatrix sample_companion_matrix(const EntryClassMap& map, std::uint64_t master_seed,
                                             std::uint64_t sample_index) {
    if (map.kind() != MapKind::Companion)
        throw std::invalid_argument("sample_companion_matrix: class map is not of companion kind");

    const auto n = static_cast<Eigen::Index>(map.size());
    std::vector<std::complex<double>> draws(map.class_count());
    for (std::size_t c = 0; c < draws.size(); ++c) {
        RandomStream stream(master_seed, sample_index, c);
        if (map.class_kind(static_cast<std::uint32_t>(c)) == ClassKind::RealGaussian) {
            draws[c] = {stream.next_standard_normal(), 0.0};
        } else {
            const double a = stream.next_standard_normal();
            const double b = stream.next_standard_normal();
            draws[c] = {a * kInvSqrt2, b * kInvSqrt2};
        }
    }

    SampledComplexMatrix sample;
    sample.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto ref = map.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            const auto z = draws[ref.class_id];
            sample.entries(i, j) = ref.conjugated ? std::conj(z) : z;
        }
    }
    sample.provenance = {master_seed, sample_index, "companion-gaussian", map.link_descriptor()};
    return sample;
}

}  // namespace pme
