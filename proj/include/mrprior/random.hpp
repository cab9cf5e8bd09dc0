#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace mri {

// Counter-based random stream. Every draw is a pure function of
// (seed, stream, counter), so independent workers can own disjoint streams
// and reproduce results regardless of scheduling. Output is identical
// across platforms (no libc distributions involved).
class RandomStream {
public:
    explicit RandomStream(uint64_t seed, uint64_t stream = 0)
        : seed_(seed), stream_(stream), counter_(0) {}

    // Derive an independent substream (chain index, coil index, ...).
    RandomStream fork(uint64_t substream) const {
        return RandomStream(seed_, mix(stream_ * 0x9e3779b97f4a7c15ULL + substream + 1));
    }

    uint64_t next_u64() {
        uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (counter_++ + 1);
        z ^= mix(stream_ + 0xbf58476d1ce4e5b9ULL);
        return mix(z);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

    // Standard real Gaussian, Box-Muller.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Circular complex Gaussian with E|z|^2 = 1 (re/im each N(0, 1/2)).
    std::complex<double> complex_gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

private:
    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_;
};

} // namespace mri
