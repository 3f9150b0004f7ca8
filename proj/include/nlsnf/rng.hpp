#pragma once

// Seeded random draws used by data generators and probes.  The raw engine is
// std::mt19937_64; the mappings to doubles are written out here instead of
// using <random> distributions so that a given seed produces the same stream
// on every standard library.

#include <cmath>
#include <cstdint>
#include <random>

#include "nlsnf/mode_vector.hpp"

namespace nlsnf {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller; u is kept away from 0 so the log is finite.
    double u = 0.0;
    do {
      u = uniform01();
    } while (u <= 0.0);
    const double v = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * v);
    have_spare_ = true;
    return r * std::cos(two_pi * v);
  }

  cplx unit_phase() {
    const double two_pi = 6.283185307179586476925286766559;
    const double theta = two_pi * uniform01();
    return {std::cos(theta), std::sin(theta)};
  }

  cplx cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// iid complex Gaussian coefficients scaled to a given L^2 norm.
inline ModeVector random_l2_vector(int M, double target_norm, Rng& rng) {
  ModeVector v(M);
  for (cplx& z : v.coeffs()) z = rng.cnormal();
  const double n = l2_norm(v);
  if (n > 0.0) {
    const double s = target_norm / n;
    for (cplx& z : v.coeffs()) z *= s;
  }
  return v;
}

}  // namespace nlsnf
