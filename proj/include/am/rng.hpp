#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace am {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive a child seed from a master seed and a purpose string, so adding a
// consumer never perturbs another consumer's stream.
inline uint64_t derive_seed(uint64_t master, std::string_view purpose) {
    return splitmix64(master ^ splitmix64(fnv1a64(purpose)));
}

// Deterministic RNG with explicit bounded sampling. std::mt19937_64 output is
// fully specified by the standard; the distribution helpers here are our own
// so results are identical across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    // Uniform in [0, bound), bound > 0. Rejection sampling, no modulo bias.
    uint64_t below(uint64_t bound) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform in [lo, hi], inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Sample k distinct indices from [0, n) without replacement, in selection
    // order. Partial Fisher-Yates over an index vector.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace am
