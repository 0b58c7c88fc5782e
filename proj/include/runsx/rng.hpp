#pragma once

#include <array>
#include <cstdint>
#include <span>

// Deterministic random number generation.
//
// Every randomized operation in this library draws from its own substream,
// derived by hashing (seed, purpose, a, b) with the splitmix64 finalizer.
// Substreams are therefore independent of iteration order and of any
// parallel schedule: the same seed always produces the same results.
//
// Streams are xoshiro256** (Blackman & Vigna); normal deviates come from
// the fixed-precision inverse normal CDF (Wichura's PPND16), one 64-bit
// draw per deviate.

namespace runsx::rng {

// splitmix64 finalizer (Vigna). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Purpose tags keep unrelated substreams disjoint.
enum : std::uint64_t {
    kStreamNoise = 1,     // per-trial measurement noise
    kStreamTrial = 2,     // per-trial permutation root
    kStreamPermute = 3,   // per-group shuffle inside a permutation plan
    kStreamTieBreak = 4,  // two-sample tie shuffling
    kStreamCase = 5,      // per-case seeds in multi-case runs
    kStreamEvenSide = 6,  // evenly-spaced side of a comparison
    kStreamEscalate = 7,  // escalated reruns
};

// Hash chain over (seed, purpose, a, b). The golden-ratio increment keeps
// zero inputs from collapsing the state.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t purpose,
                                  std::uint64_t a, std::uint64_t b) noexcept {
    constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    std::uint64_t h = mix64(seed + kGamma);
    h = mix64(h ^ (purpose + kGamma));
    h = mix64(h ^ (a + kGamma));
    h = mix64(h ^ (b + kGamma));
    return h;
}

// Inverse of the standard normal CDF (Wichura's algorithm, PPND16).
// Relative accuracy about 1e-15 over p in (0, 1).
double normal_quantile(double p);

// Standard normal CDF via erfc; accurate in both tails.
double normal_cdf(double z);

// xoshiro256** stream seeded through splitmix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ull;
            word = mix64(sm);
        }
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1): (k + 0.5) / 2^53.
    double uniform01() noexcept {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal deviate; consumes exactly one 64-bit draw.
    double normal() { return normal_quantile(uniform01()); }

    // Uniform integer in [0, n); rejection keeps it exactly uniform.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold) return x % n;
        }
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> state_;
};

}  // namespace runsx::rng
