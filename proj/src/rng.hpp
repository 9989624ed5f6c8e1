#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace idsynth {

// splitmix64; used both as a seed expander and as a stable hash combiner so
// that derived streams do not depend on platform or standard-library details.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    uint64_t s = seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

inline uint64_t hash_str(std::string_view s) {
    // FNV-1a, 64-bit.
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// xoshiro256++ with an explicit Box-Muller normal generator. All sampling in
// the project goes through this class; std::random distributions are avoided
// because their output sequences are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n).
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
        uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Inclusive integer range.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool coin(double p = 0.5) { return uniform() < p; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Independent stream for a named purpose; detaching sub-streams keeps
    // unrelated consumers from perturbing each other's draws.
    Rng child(std::string_view tag) const {
        uint64_t h = hash_combine(state_[0] ^ state_[3], hash_str(tag));
        return Rng(h);
    }

    Rng child(uint64_t index) const {
        return Rng(hash_combine(state_[0] ^ state_[3], index));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable per-document stream: hash(master_seed, doc_index).
inline uint64_t derive_seed(uint64_t master, uint64_t index, std::string_view tag = {}) {
    uint64_t h = hash_combine(master, index);
    if (!tag.empty()) h = hash_combine(h, hash_str(tag));
    return h;
}

}  // namespace idsynth
