#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace egnli {

// Deterministic RNG wrapper. mt19937_64 raw output is specified by the
// standard, and bounded draws use rejection sampling instead of
// std::uniform_int_distribution (whose algorithm is implementation-defined),
// so sampled artifacts are byte-identical across compilers and platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // uniform in [0, n)
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    size_t index(size_t n) { return static_cast<size_t>(below(n)); }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Per-stage seed derivation: every pipeline stage draws from the single run
// seed through a named hash, so one seed reproduces the whole pipeline and
// stages stay independent of each other.
inline uint64_t derive_seed(uint64_t master, std::string_view stage) {
    return splitmix64(master ^ fnv1a64(stage));
}

inline uint64_t derive_seed(uint64_t master, std::string_view stage, uint64_t index) {
    return splitmix64(derive_seed(master, stage) ^ splitmix64(index + 0x51ed270b0741d668ull));
}

}  // namespace egnli
