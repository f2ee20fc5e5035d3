#include "pme/rng.hpp"

#include <stdexcept>

namespace pme {

std::string to_string(EntryDistribution d) {
    switch (d) {
        case EntryDistribution::StandardNormal: return "standard-normal";
        case EntryDistribution::Rademacher: return "rademacher";
        case EntryDistribution::UniformScaled: return "uniform-scaled";
    }
    return "standard-normal";
}

EntryDistribution parse_distribution(const std::string& name) {
    if (name == "standard-normal") return EntryDistribution::StandardNormal;
    if (name == "rademacher") return EntryDistribution::Rademacher;
    if (name == "uniform-scaled") return EntryDistribution::UniformScaled;
    throw std::invalid_argument("unknown entry distribution: " + name +
                                " (expected standard-normal, rademacher or uniform-scaled)");
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
}

// 64-bit finalizer (splitmix64) used to fold the high words of wide stream
// coordinates into the key.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t sample_index,
                           std::uint64_t class_id) {
    // Low words of (sample_index, class_id) form a disjoint counter prefix;
    // high words (zero in practice) fold into the key so every triple still
    // names a distinct stream.
    const std::uint64_t key = master_seed ^ mix64(mix64(sample_index >> 32) + (class_id >> 32));
    key_ = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    stream_ = {static_cast<std::uint32_t>(sample_index), static_cast<std::uint32_t>(class_id)};
}

std::array<std::uint32_t, 4> RandomStream::block() {
    std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_),
                                        static_cast<std::uint32_t>(counter_ >> 32), stream_[0],
                                        stream_[1]};
    ++counter_;
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        philox_round(ctr, key);
    }
    return ctr;
}

std::uint64_t RandomStream::next_u64() {
    if (buffered_ < 2) {
        buffer_ = block();
        buffered_ = 4;
    }
    const std::uint64_t hi = buffer_[4 - buffered_];
    const std::uint64_t lo = buffer_[5 - buffered_];
    buffered_ -= 2;
    return (hi << 32) | lo;
}

double RandomStream::next_standard_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    while (true) {
        const double u = 2.0 * next_uniform01() - 1.0;
        const double v = 2.0 * next_uniform01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            const double factor = std::sqrt(-2.0 * std::log(s) / s);
            cached_normal_ = v * factor;
            has_cached_normal_ = true;
            return u * factor;
        }
    }
}

double RandomStream::draw(EntryDistribution d) {
    switch (d) {
        case EntryDistribution::StandardNormal: return next_standard_normal();
        case EntryDistribution::Rademacher: return (next_u64() & 1u) ? 1.0 : -1.0;
        case EntryDistribution::UniformScaled:
            // Uniform on [-sqrt(3), sqrt(3)]: variance exactly 1.
            return (2.0 * next_uniform01() - 1.0) * 1.7320508075688772;
    }
    return 0.0;
}

}  // namespace pme
