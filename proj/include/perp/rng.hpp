#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace perp {

// splitmix64: tiny counter-based generator. Used instead of std:: engines so
// that stream layout is identical across standard-library versions and across
// stop/resume boundaries.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with 53 bits of mantissa
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

    double normal() {
        // Box-Muller, one value per call (the pair's second half is discarded
        // to keep consumption independent of call pattern)
        double u1 = u01();
        double u2 = u01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }
};

// Derive an independent sub-stream for item i of a seeded batch.
inline uint64_t derive_seed(uint64_t seed, uint64_t i) {
    SplitMix64 g(seed ^ (0x632be59bd9b4e019ULL + i * 0x9e3779b97f4a7c15ULL));
    return g.next();
}

// In-place Fisher-Yates; spelled out rather than std::shuffle because the
// standard leaves the shuffle algorithm unspecified.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& g) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(g.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace perp
