#pragma once

#include <cstdint>
#include <random>

namespace snnot {

// Independent named streams under one user seed.
enum class Stream : std::uint64_t {
    intervals = 1,
    threshold = 2,
    quantiles = 3,
    simulation = 4,
    forecast_restarts = 5,
};

// Engine for replicate b of a stream. Seeding from the triple (seed, b, stream)
// makes every replicate independent of the order in which replicates run.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t b, Stream stream) {
    const auto s = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(s),    static_cast<std::uint32_t>(s >> 32)};
    return std::mt19937_64(seq);
}

// Same with one more key word, e.g. the bit pattern of a grid parameter.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t b, Stream stream, std::uint64_t key) {
    const auto s = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(s),    static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(key),  static_cast<std::uint32_t>(key >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace snnot
