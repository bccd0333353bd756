#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace qconv {

// Deterministic random stream. The engine is std::mt19937_64, whose raw output
// is pinned by the standard; all distributions are implemented here rather
// than taken from <random> so that the draw sequence is identical across
// standard libraries and so that RNG consumption per event is under our
// control (several reproducibility contracts depend on the exact call order).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Independent stream for replica `stream` of a base seed.
    static Rng substream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t raw() { return eng_(); }

    // Uniform on [0, 1), 53-bit resolution. One engine word.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Bitmask rejection; consumes nothing for n <= 1
    // and exactly one word when n is a power of two.
    std::uint32_t uniform_int(std::uint32_t n);

    // Standard normal via Box-Muller (cosine branch, no caching): exactly two
    // engine words per draw.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double rate);

    // Gamma(shape, 1) by Marsaglia-Tsang squeeze (rejection; variable draws).
    double gamma(double shape);

    // Student-t with dof degrees of freedom (location 0, scale 1).
    double student_t(double dof);

    // Index ~ probs (inverse-CDF walk, one uniform). probs need not be
    // perfectly normalized; the walk clamps to the last index.
    std::size_t categorical(std::span<const double> probs);

private:
    std::mt19937_64 eng_;
};

// SplitMix64 step; used for seed mixing.
std::uint64_t splitmix64(std::uint64_t& state);

// Well-mixed seed for replica `stream` of a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace qconv
