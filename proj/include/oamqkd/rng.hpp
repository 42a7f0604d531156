#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace oamqkd {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_scope(std::string_view scope) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : scope) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seed of the independent stream (master, scope, index). Streams for different
// indices never depend on how many other streams were drawn before them, which
// is what makes block-parallel simulation reproducible.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view scope,
                                    std::uint64_t index) noexcept {
    return mix64(mix64(master ^ hash_scope(scope)) + mix64(index));
}

inline Engine make_stream(std::uint64_t master, std::string_view scope, std::uint64_t index) {
    return Engine{derive_seed(master, scope, index)};
}

}  // namespace oamqkd
