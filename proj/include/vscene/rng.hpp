#pragma once

#include <cstdint>
#include <string_view>

namespace vscene {

// SplitMix64 finalizer; full-period mixing of a 64-bit state.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_bytes(std::string_view s) {
    // FNV-1a, 64 bit
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Deterministic, splittable random generator. Child streams are derived
/// from keys rather than draw order, so results do not depend on how work
/// is scheduled across threads. All outputs are reproducible across
/// platforms (no libstdc++ distributions involved).
class Rng {
public:
    Rng() : state_(mix64(0)) {}
    explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

    /// Independent stream addressed by an integer key. Does not advance *this.
    [[nodiscard]] Rng derive(std::uint64_t key) const {
        Rng child;
        child.state_ = mix64(state_ ^ mix64(key + 0x632be59bd9b4e019ull));
        return child;
    }

    /// Independent stream addressed by a string key (e.g. a scene id).
    [[nodiscard]] Rng derive(std::string_view key) const {
        return derive(hash_bytes(key));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<std::size_t>(x % bound);
    }

private:
    std::uint64_t state_;
};

}  // namespace vscene
