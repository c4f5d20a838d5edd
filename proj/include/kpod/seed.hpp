#pragma once

#include <cstdint>
#include <initializer_list>

namespace kpod {

using Seed = std::uint64_t;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed from a base seed and an ordered tuple of indices. The result
/// depends only on the values, never on the order in which children are
/// requested.
constexpr Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(base);
    for (std::uint64_t component : path) h = mix64(h ^ mix64(component + 0x632be59bd9b4e019ULL));
    return h;
}

}  // namespace kpod
