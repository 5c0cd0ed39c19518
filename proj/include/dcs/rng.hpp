#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace dcs {

// xoshiro256** with splitmix64 seeding. All randomness in the library flows
// through this generator so that runs are reproducible from a single master
// seed, and so that parallel loops can derive per-element substreams that do
// not depend on the worker count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    std::uint64_t next() {
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

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n) {
        __uint128_t m = static_cast<__uint128_t>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Zero-mean Laplace with scale b (variance 2 b^2).
    double laplace(double scale) {
        const double u = uniform() - 0.5;
        const double sgn = (u < 0.0) ? -1.0 : 1.0;
        return -scale * sgn * std::log(1.0 - 2.0 * std::fabs(u));
    }

    // One-sided exponential with the given rate (mean 1/rate, variance 1/rate^2).
    double exponential(double rate) {
        double u = uniform();
        while (u >= 1.0) u = uniform();
        return -std::log(1.0 - u) / rate;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Documented stream-splitting scheme: stream id = splitmix64 chain over
// (seed, fnv1a(tag), index). Each (tag, index) pair names an independent
// substream of the master seed; parallel workers use the index of the item
// they process, so results do not depend on scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t x = seed;
    Rng::splitmix64(x);
    x ^= h;
    Rng::splitmix64(x);
    x ^= index;
    return Rng::splitmix64(x);
}

inline Rng substream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    return Rng(mix_seed(seed, tag, index));
}

} // namespace dcs
