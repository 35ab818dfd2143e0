#pragma once

#include <cstdint>

namespace bowenlab {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so results are independent of evaluation order and
// thread count. The mixer is the splitmix64 finalizer applied to a combined
// key; statistically this is plenty for sampling probe directions and shuffles.
struct CounterRng {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t k = mix(seed ^ 0x5851f42d4c957f2dULL);
        k = mix(k ^ stream * 0xda942042e4dd58b5ULL);
        return mix(k ^ counter);
    }

    // Uniform in [0, 1).
    double u01(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Uniform in [-1, 1).
    double sym(std::uint64_t counter) const { return 2.0 * u01(counter) - 1.0; }

    std::uint64_t index(std::uint64_t counter, std::uint64_t n) const {
        return bits(counter) % n;
    }
};

} // namespace bowenlab
