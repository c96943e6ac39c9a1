// Seeded random draws with platform-stable output (the standard
// distributions are implementation-defined, so uniforms are built directly
// from the mt19937_64 stream).
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "agler/types.hpp"

namespace agler {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  Complex unit_complex() {
    const double arg = 2.0 * M_PI * uniform();
    return Complex(std::cos(arg), std::sin(arg));
  }

  // Uniform on the disc |z| <= radius.
  Complex disc_point(double radius) {
    return radius * std::sqrt(uniform()) * unit_complex();
  }

  // Modulus uniform in [r + margin, 1/r - margin], argument uniform.
  Complex annulus_point(double r, double margin) {
    const double lo = r + margin;
    const double hi = 1.0 / r - margin;
    return uniform(lo, hi) * unit_complex();
  }

  Complex gaussian_complex() {
    // Box-Muller from two stream uniforms.
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1 + 1e-300));
    return Complex(rad * std::cos(2.0 * M_PI * u2),
                   rad * std::sin(2.0 * M_PI * u2));
  }

  Vector gaussian_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian_complex();
    return v;
  }

  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian_complex();
    return m;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace agler
