#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace pme {

enum class EntryDistribution { StandardNormal, Rademacher, UniformScaled };

std::string to_string(EntryDistribution d);
EntryDistribution parse_distribution(const std::string& name);

/// Counter-based random substream (Philox4x32-10). Each (master_seed,
/// sample_index, class_id) triple names its own stream: the seed keys the
/// permutation and the pair (sample_index, class_id) selects a disjoint
/// counter prefix, so draws are reproducible for any worker count and
/// scheduling. Gaussians use the Marsaglia polar method, deterministic
/// given the stream.
class RandomStream {
  public:
    RandomStream(std::uint64_t master_seed, std::uint64_t sample_index, std::uint64_t class_id);

    std::uint64_t next_u64();

    /// Uniform on [0, 1), 53 random bits.
    double next_uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_standard_normal();

    /// One draw of a unit-variance, mean-zero entry distribution.
    double draw(EntryDistribution d);

  private:
    std::array<std::uint32_t, 4> block();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;  // fixed counter prefix
    std::uint64_t counter_ = 0;            // block index within the stream
    std::array<std::uint32_t, 4> buffer_{};
    unsigned buffered_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace pme
