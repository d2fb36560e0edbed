#pragma once

#include <cstdint>
#include <random>

namespace isacwave {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent random streams drawn from one scenario or run seed.
enum class Stream : std::uint64_t {
    Scenario = 1,
    Comm = 2,
    Sensing = 3,
    Joint = 4,
    Training = 5,
    Split = 6,
};

/// Counter-based seed derivation used throughout the pipeline:
///
///     seed(master, index, stream) = splitmix64(splitmix64(master ^ splitmix64(stream)) + index)
///
/// Sample i of a dataset generated with master seed m uses
/// derive_seed(m, i, Stream::Scenario); every random draw for that sample is
/// made from generators seeded by derive_seed(sample_seed, waveform, stream).
/// Results therefore do not depend on evaluation order or worker count.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t stream = 0) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    Stream stream) noexcept {
    return derive_seed(master, index, static_cast<std::uint64_t>(stream));
}

} // namespace isacwave
