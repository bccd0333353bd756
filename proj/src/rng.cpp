#include "qconv/rng.hpp"

#include <cmath>
#include <numbers>

namespace qconv {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t base = splitmix64(s);
    s = base + 0x632BE59BD9B4E019ULL * (stream + 1);
    return splitmix64(s);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix_seed(seed, stream));
}

std::uint32_t Rng::uniform_int(std::uint32_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    for (;;) {
        std::uint64_t x = eng_() & mask;
        if (x < n) return static_cast<std::uint32_t>(x);
    }
}

double Rng::normal() {
    double u1 = 1.0 - uniform01(); // (0, 1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) {
    double u = uniform01();
    return -std::log1p(-u) / rate;
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        double u = 1.0 - uniform01();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 &&
            std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double Rng::student_t(double dof) {
    double z = normal();
    double chi2 = 2.0 * gamma(0.5 * dof);
    return z / std::sqrt(chi2 / dof);
}

std::size_t Rng::categorical(std::span<const double> probs) {
    double u = uniform01();
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        c += probs[i];
        if (u < c) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
}

} // namespace qconv
