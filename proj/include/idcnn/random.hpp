#pragma once

#include <cstdint>
#include <random>

namespace idcnn {

/// Seeded generator with platform-independent derived draws.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// standard distributions are not, so every draw used by this project is
/// derived from the raw 64-bit stream here.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform over the 256 byte values.
    std::uint8_t byte() { return static_cast<std::uint8_t>(next() >> 56); }

    bool coin() { return (next() >> 63) != 0; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Unbiased integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix_seed(master ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

} // namespace idcnn
