#ifndef BCPP_RNG_HPP
#define BCPP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace bcpp {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic per-replica seed derivation: hash(master_seed, replica).
inline uint64_t derive_seed(uint64_t master, uint64_t replica) {
    uint64_t s = master ^ (0x517cc1b727220a95ULL * (replica + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Xoshiro256++ with splitmix64 seeding. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed = 0x6a09e667f3bcc908ULL) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~uint64_t{0}; }

    uint64_t operator()() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1], safe as a log() argument.
    double uniform_pos() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform integer in [0, n) via Lemire's multiply-shift rejection.
    uint64_t below(uint64_t n) {
        uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Poisson via product-of-uniforms for small mean, PTRS (Hormann) otherwise.
    uint64_t poisson(double mean) {
        if (mean <= 0) return 0;
        if (mean < 30.0) {
            const double l = std::exp(-mean);
            uint64_t k = 0;
            double p = uniform();
            while (p > l) {
                ++k;
                p *= uniform();
            }
            return k;
        }
        const double smu = std::sqrt(mean);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mu = std::log(mean);
        while (true) {
            double u = uniform() - 0.5;
            double v = uniform();
            double us = 0.5 - std::fabs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            double rhs = kf * log_mu - mean - std::lgamma(kf + 1.0);
            if (lhs <= rhs) return static_cast<uint64_t>(kf);
        }
    }

    /// Gamma(shape, scale) via Marsaglia-Tsang.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            double u = uniform_pos();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double dd = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * dd);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return dd * v * scale;
            if (std::log(u) < 0.5 * x * x + dd * (1.0 - v + std::log(v))) return dd * v * scale;
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

} // namespace bcpp

#endif
