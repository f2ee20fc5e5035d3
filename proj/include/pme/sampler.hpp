#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>

#include "pme/entry_classes.hpp"
#include "pme/rng.hpp"

namespace pme {

struct Provenance {
    std::uint64_t seed = 0;
    std::uint64_t sample_index = 0;
    std::string distribution;
    std::string link;
};

/// One realized matrix of the real ensemble: exactly symmetric, every
/// position filled with its class's single draw.
struct SampledRealMatrix {
    Eigen::MatrixXd entries;
    Provenance provenance;
};

/// One realized matrix of the complex companion: exactly Hermitian, real
/// classes draw a real unit Gaussian, complex classes draw (a+ib)/sqrt(2)
/// with the conjugate placed on the flagged half.
struct SampledComplexMatrix {
    Eigen::MatrixXcd entries;
    Provenance provenance;
};

SampledRealMatrix sample_real_matrix(const EntryClassMap& map, EntryDistribution dist,
                                     std::uint64_t master_seed, std::uint64_t sample_index);

SampledComplexMatrix sample_companion_matrix(const EntryClassMap& map, std::uint64_t master_seed,
                                             std::uint64_t sample_index);

}  // namespace pme
