#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "hed/error.hpp"

namespace hed {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64_next(s);
}

inline std::uint64_t hash_str64(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Deterministic random stream. All distributions are implemented here rather
// than with std::<distribution> types so that sequences are identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Named sub-stream: decorrelated engine derived from (master, name).
    static Rng stream(std::uint64_t master, std::string_view name) {
        return Rng(mix64(master ^ mix64(hash_str64(name))));
    }

    std::uint64_t next() { return engine_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection sampling keeps it exactly uniform.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw Error("uniform_index: n must be positive");
        const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
        const std::uint64_t bound = std::numeric_limits<std::uint64_t>::max() - rem;
        for (;;) {
            std::uint64_t r = next();
            if (r <= bound) return r % n;
        }
    }

    // Box-Muller; the second deviate of each pair is cached.
    double normal(double mean, double stddev) {
        if (has_cached_) {
            has_cached_ = false;
            return mean + stddev * cached_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stateless keyed coin: same (key parts) -> same decision, with no sequence
// dependence. Used for structure-preserving dropout over symmetric matrices.
inline bool keyed_keep(std::uint64_t nonce, std::uint64_t a, std::uint64_t b, double drop_prob) {
    std::uint64_t s = nonce;
    s = mix64(s ^ mix64(a + 0x9e3779b97f4a7c15ULL));
    s = mix64(s ^ mix64(b + 0x7f4a7c159e3779b9ULL));
    double u = static_cast<double>(s >> 11) * 0x1.0p-53;
    return u >= drop_prob;
}

}  // namespace hed
