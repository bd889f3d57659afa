#pragma once

#include <cstdint>
#include <limits>

namespace sbm {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256**; satisfies UniformRandomBitGenerator so the std
// distributions work with it.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    // Independent stream for replicate `index` of a run seeded with `master`.
    static Rng stream(std::uint64_t master, std::uint64_t index) {
        std::uint64_t s = master;
        std::uint64_t a = splitmix64(s);
        std::uint64_t t = index ^ (a + 0x632BE59BD9B4E019ull);
        Rng r(0);
        for (auto& w : r.s_) w = splitmix64(t) ^ splitmix64(s);
        return r;
    }

    void reseed(std::uint64_t seed) {
        for (auto& w : s_) w = splitmix64(seed);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t out = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return out;
    }

    // Uniform on (0, 1), never returns 0.
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    const std::uint64_t* state() const { return s_; }
    void set_state(const std::uint64_t* st) {
        for (int i = 0; i < 4; ++i) s_[i] = st[i];
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace sbm
