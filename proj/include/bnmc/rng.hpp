#ifndef BNMC_RNG_HPP
#define BNMC_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace bnmc {

/// Seedable Mersenne Twister stream. The engine's output sequence is fixed by
/// the standard, and the conversions below avoid the library-specific
/// distributions, so a (seed, stream) pair yields the same draws on every
/// platform.
class Rng {
public:
    static constexpr std::string_view kName = "mt19937_64";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(mix(seed, stream)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); safe to take the log of.
    double uniform_open() {
        double u;
        do u = uniform();
        while (u == 0.0);
        return u;
    }

    // Unbiased integer in [0, bound) by rejection.
    std::size_t index(std::size_t bound) {
        const std::uint64_t b = bound;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % b);
        std::uint64_t x;
        do x = engine_();
        while (x >= limit);
        return static_cast<std::size_t>(x % b);
    }

private:
    // splitmix64 finalizer over (seed, stream) so nearby seeds and streams
    // start far apart.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace bnmc

#endif  // BNMC_RNG_HPP
