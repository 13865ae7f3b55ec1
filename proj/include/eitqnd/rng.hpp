// Reproducible random streams: per-stream seeds are derived from
// (seed, stream index) with the splitmix64 finalizer and drive an mt19937_64.
// All distributions are hand-inverted from raw uniforms so that identical
// seeds give identical draws on every platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "eitqnd/errors.hpp"

namespace eitqnd {

inline constexpr const char* kRngAlgorithm = "splitmix64-streams/mt19937_64";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream seed for (base seed, stream index).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(stream_seed(seed, stream));
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Poisson(mean) by sequential inversion; exact for the small means used here.
    int poisson(double mean) {
        if (mean < 0.0)
            throw InvalidParameterError("Poisson mean must be >= 0");
        if (mean == 0.0)
            return 0;
        if (mean > 50.0)
            throw InvalidParameterError("Poisson inversion sampler limited to mean <= 50");
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        int k = 0;
        while (u > cdf && k < 500) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    /// Index in [0, n) with probabilities proportional to weights.
    template <class Weights>
    int discrete(const Weights& weights, int n) {
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            total += weights[i];
        if (total <= 0.0)
            throw InvalidParameterError("discrete sampler needs positive total weight");
        double u = uniform() * total;
        for (int i = 0; i < n; ++i) {
            u -= weights[i];
            if (u < 0.0)
                return i;
        }
        return n - 1;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace eitqnd
