#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace advids {

/// Small deterministic generator (splitmix64). Self-contained so streams are
/// reproducible across compilers and standard libraries.
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0. Rejection sampling, unbiased.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Standard normal via Box-Muller. Consumes two uniforms per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline std::uint64_t splitmix64_once(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Labeled seed derivation. One root seed fans out into independent streams
/// ("init", "split", "attack", ...), so each component is reproducible on its own.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64_once(root ^ h);
}

/// Indexed seed derivation, e.g. per-epoch, per-batch or per-row streams.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64_once(root ^ splitmix64_once(index));
}

/// Deterministic Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, rng& r) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(r.uniform_index(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace advids
