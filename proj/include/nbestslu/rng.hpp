#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nbest {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive well-separated streams from (seed, id)
// pairs so corpus regeneration is stable under record reordering.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng derive_stream(std::uint64_t seed, std::uint64_t id) {
    return Rng(mix64(mix64(seed) ^ mix64(id + 0x51ed2701ULL)));
}

// Hand-rolled draws: the standard distributions are implementation-defined,
// and reproducibility across toolchains matters more here than perfect bias.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

template <typename T>
void shuffle_deterministic(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace nbest
