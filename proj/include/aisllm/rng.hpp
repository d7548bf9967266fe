#pragma once

// Deterministic random utilities. SplitMix64 keeps results identical
// across standard libraries and runs, unlike std::shuffle/distributions.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace aisllm {

struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    /// Standard normal via Box-Muller.
    double gauss() {
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

/// Stateless hash of a (seed, stream, counter) triple; used for seeded
/// dropout masks that do not depend on evaluation order.
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    SplitMix64 g(seed ^ (stream * 0x9e3779b97f4a7c15ull) ^ (counter + 0x2545f4914f6cdd1dull));
    g.next();
    return g.next();
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace aisllm
