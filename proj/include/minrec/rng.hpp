#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "minrec/common.hpp"

namespace minrec {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256** with hand-rolled bounded sampling so that draws are
// byte-identical across standard libraries (std::uniform_int_distribution
// is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw NumericError("Rng::bounded(0)");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    double uniform01() {  // [0, 1) with 53 bits
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double gaussian() {  // Box-Muller, one value per call
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

// Per-purpose streams are derived from one master seed by fixed labels, so
// adding a pipeline stage never perturbs another stage's draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t state = master ^ fnv1a64(label);
    return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    std::uint64_t state = master ^ fnv1a64(label) ^ (0x9e3779b97f4a7c15ull * (index + 1));
    return splitmix64(state);
}

inline Rng derive_rng(std::uint64_t master, std::string_view label) { return Rng(derive_seed(master, label)); }

inline Rng derive_rng(std::uint64_t master, std::string_view label, std::uint64_t index) {
    return Rng(derive_seed(master, label, index));
}

}  // namespace minrec
