#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace stitchkit {

/// SplitMix64 avalanche step (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-sample seed from a master seed and a global sample index. Samples get
/// decorrelated streams no matter how work is split across workers, so batch
/// output is independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t sample_index) {
    return splitmix64(master_seed + 0x9E3779B97F4A7C15ULL * (sample_index + 1));
}

/// Deterministic random stream. Wraps std::mt19937_64 (bit-exact by the
/// standard) with hand-rolled bounded samplers, so outputs do not depend on
/// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [lo, hi], inclusive. Mask-and-reject, bias free.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
        if (range == 0) return lo;
        std::uint64_t mask = range;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t v;
        do {
            v = engine_() & mask;
        } while (v > range);
        return lo + static_cast<std::int64_t>(v);
    }

    /// Uniform double in [lo, hi). 53-bit mantissa path.
    double uniform_real(double lo, double hi) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    bool bernoulli(double p) { return uniform_real(0.0, 1.0) < p; }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j =
                static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace stitchkit
