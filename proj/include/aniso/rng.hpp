#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace aniso {

/// Deterministic splittable PRNG (splitmix64 core). Unlike the std
/// distributions, every draw is bit-reproducible across platforms, which the
/// experiment outputs rely on. Seeds are 64-bit and recorded in artifacts.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (deterministic given the stream).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Log-uniform in [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) { // inclusive range
        return lo + std::int64_t(next_u64() % std::uint64_t(hi - lo + 1));
    }

    /// Independent child stream; distinct tags give distinct streams.
    Rng split(std::uint64_t tag) {
        Rng child(state_ ^ (0xd1b54a32d192ed03ULL * (tag + 0x632be59bd9b4e019ULL)));
        child.next_u64();
        return child;
    }

    Rng split(std::string_view tag) {
        // FNV-1a over the tag, folded into the split.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : tag) h = (h ^ std::uint64_t(std::uint8_t(c))) * 0x100000001b3ULL;
        return split(h);
    }

  private:
    std::uint64_t state_;
};

} // namespace aniso
