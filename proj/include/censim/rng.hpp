#pragma once

// Seed-stable randomness. std::shuffle and the std distributions are
// implementation-defined, so permutations and bounded draws are rolled by
// hand on top of mt19937_64: identical seeds give identical streams on every
// platform.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace censim {

inline constexpr std::string_view kShuffleAlgorithm = "fisher-yates/mt19937_64/v1";

struct ShuffleSource {
    std::uint64_t seed = 0;
    std::string_view algorithm = kShuffleAlgorithm;

    std::mt19937_64 engine() const { return std::mt19937_64{seed}; }
};

// Uniform draw from [0, bound) by rejection; avoids modulo bias.
inline std::uint64_t bounded_u64(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

template <typename T>
void fisher_yates(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_u64(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

// Uniform double in [0, 1) with 53 bits of the raw stream.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace censim
