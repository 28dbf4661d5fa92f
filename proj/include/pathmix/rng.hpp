#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pathmix {

/** splitmix64 step. Only used to expand seeds, never as the working engine. */
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * Engine for replicate `stream_index` of a run with `master_seed`.
 *
 * Streams are a pure function of (master_seed, stream_index), so replicate b
 * sees the same randomness no matter how replicates are scheduled across
 * threads. This is what makes every Monte Carlo result here reproducible
 * byte-for-byte under --jobs.
 */
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t state = master_seed ^ (0x632be59bd9b4e019ULL * (stream_index + 1));
    std::uint64_t w0 = splitmix64(state);
    std::uint64_t w1 = splitmix64(state);
    std::uint64_t w2 = splitmix64(state);
    std::uint64_t w3 = splitmix64(state);
    std::seed_seq seq{
        static_cast<std::uint32_t>(w0), static_cast<std::uint32_t>(w0 >> 32),
        static_cast<std::uint32_t>(w1), static_cast<std::uint32_t>(w1 >> 32),
        static_cast<std::uint32_t>(w2), static_cast<std::uint32_t>(w2 >> 32),
        static_cast<std::uint32_t>(w3), static_cast<std::uint32_t>(w3 >> 32)};
    return std::mt19937_64(seq);
}

inline std::int64_t draw_poisson(std::mt19937_64& eng, double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(eng);
}

inline std::int64_t draw_binomial(std::mt19937_64& eng, std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, p);
    return dist(eng);
}

inline double draw_uniform01(std::mt19937_64& eng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(eng);
}

/** Index into a cumulative-weight table: smallest i with u < cum[i]. */
inline std::size_t pick_index(const std::vector<double>& cum, double u) {
    double target = u * cum.back();
    std::size_t lo = 0, hi = cum.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (target < cum[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
}

}  // namespace pathmix
