#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace paracflow {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Seeded generator with hand-rolled distributions so that sampled streams
/// are stable across standard-library implementations. All experiment
/// randomness flows through this type; there is no ambient entropy.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        return static_cast<int>(static_cast<double>(n) * uniform());
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double r = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * r;
        has_spare_ = true;
        return u * r;
    }

    double normal(double mu, double sd) { return mu + sd * normal(); }

    /// Independent sub-stream seed for (seed, stream) pairs. Used to make
    /// trial/member/phase streams independent of scheduling order.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return detail::splitmix64(seed ^ detail::splitmix64(stream + 0x51ed270b9a73e3a1ULL));
    }

    static std::uint64_t derive(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return derive(seed, h);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace paracflow
