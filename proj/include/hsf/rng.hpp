#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hsf {

// Deterministic RNG used everywhere randomness is needed. std::mt19937_64 has
// a portable bit stream; the double conversion below is explicit so results
// are identical across standard libraries (std::uniform_real_distribution is
// implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed), seed_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) using the top 53 bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). Rejection sampling keeps the stream portable.
    uint64_t next_below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // Fisher-Yates; std::shuffle is not portable across stdlib versions.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent sub-stream for a named purpose, so adding one
    // consumer does not shift the draws of another.
    Rng fork(std::string_view tag) const {
        uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return Rng(splitmix64(seed_ ^ h));
    }

private:
    static uint64_t splitmix64(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    uint64_t seed_;
};

}  // namespace hsf
