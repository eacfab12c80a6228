#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace tg {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable seed derivation: every pipeline stage draws its seed from the global
// seed plus a fixed tag. The tag hash (FNV-1a) and the mix are part of the
// determinism contract, so artifacts only change when the seed itself does.
inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(base ^ splitmix64(h));
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index) {
    return splitmix64(derive_seed(base, tag) ^ splitmix64(index));
}

// Deterministic RNG built on mt19937_64 (a fully specified engine) with
// hand-rolled distributions; the std distributions are implementation-defined
// and would break byte-identical artifacts across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
    uint64_t uniform_below(uint64_t bound) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % bound;
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller, one cached value.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Index draw with probability proportional to non-negative weights.
    size_t discrete(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T> &items) {
        for (size_t i = items.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Uniform sample of `count` distinct indices from [0, n), in draw order.
    std::vector<uint64_t> sample_indices(uint64_t n, uint64_t count) {
        std::vector<uint64_t> pool(n);
        for (uint64_t i = 0; i < n; ++i) pool[i] = i;
        if (count > n) count = n;
        for (uint64_t i = 0; i < count; ++i) {
            const uint64_t j = i + uniform_below(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
        return pool;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tg
