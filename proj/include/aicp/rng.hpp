#pragma once

// Deterministic, splittable random number generation.
//
// Every stochastic quantity in the library is drawn from a stream derived
// from a 64-bit master seed plus integer tags (domain, index). Streams are
// independent of evaluation order: stream (seed, domain, k) always yields
// the same sequence no matter which model requests it or when.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace aicp {

// splitmix64 finalizer; good avalanche, used for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Domain tags keep unrelated streams disjoint under one master seed.
enum class StreamDomain : std::uint64_t {
    MockNoise = 1,   // noise added by the mock generator
    Bootstrap = 2,   // bootstrap iteration kappa (1-based)
    MockSequence = 3, // per-mock seeds inside experiment suites
    PlanSequence = 4, // per-mock bootstrap plan seeds inside suites
};

constexpr std::uint64_t derive_seed(std::uint64_t master, StreamDomain domain,
                                    std::uint64_t index) noexcept {
    std::uint64_t h = mix64(master ^ 0xa0761d6478bd642fULL);
    h = mix64(h ^ mix64(static_cast<std::uint64_t>(domain)));
    return mix64(h ^ mix64(index));
}

// xoshiro256** (Blackman & Vigna), seeded through splitmix64.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
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

    // uniform in [0,1), 53-bit resolution
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in (0,1]; safe as a log argument
    double uniform_pos() noexcept {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Standard normal deviates via Box-Muller; consumes exactly two uniforms
// per pair, so the draw count is deterministic.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) noexcept : gen_(seed) {}

    double next() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = gen_.uniform_pos();
        const double u2 = gen_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        have_spare_ = true;
        return r * std::cos(angle);
    }

  private:
    Xoshiro256 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline GaussianStream gaussian_stream(std::uint64_t master, StreamDomain domain,
                                      std::uint64_t index) noexcept {
    return GaussianStream(derive_seed(master, domain, index));
}

} // namespace aicp
