#pragma once

#include <cstdint>
#include <random>

namespace serene {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used both for deriving independent RNG streams and
/// for the result-value encoding.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Named sub-streams of a run seed, so that adding draws to one concern
/// does not perturb another.
enum class Stream : std::uint64_t {
    Roster = 1,
    Network = 2,
    Workers = 3,
    Verifier = 4,
    Detection = 5,
    Mitigation = 6,
    Activation = 7,
};

inline Rng make_stream(std::uint64_t seed, Stream s) {
    return Rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(s))));
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

inline double uniform(Rng& rng, double lo, double hi) {
    if (hi <= lo) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace serene
