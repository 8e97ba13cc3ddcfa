#pragma once

#include <cstdint>
#include <random>

#include "fekete/vec3.hpp"

namespace fekete {

// Deterministic random source. All randomness in the library flows through
// this wrapper; the raw 64-bit stream is mapped to doubles by a fixed rule so
// results do not depend on the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is irrelevant at the sizes used here (n << 2^64)
        return gen_() % n;
    }

    /// Uniform direction on the unit sphere.
    Vec3 unit_vector() {
        const double z = 1.0 - 2.0 * uniform01();
        const double phi = 2.0 * 3.14159265358979323846 * uniform01();
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {s * std::cos(phi), s * std::sin(phi), z};
    }

    /// Uniform point in the closed ball.
    Vec3 in_ball(const Vec3& center, double radius) {
        const double u = uniform01();
        return center + unit_vector() * (radius * std::cbrt(u));
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace fekete
