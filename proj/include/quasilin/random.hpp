#pragma once

#include "quasilin/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace quasilin {

// Deterministic random source for reproducible instances. std::mt19937_64 is
// portable bit-for-bit; the Gaussian transform is done by hand because
// std::normal_distribution output is implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa draw in [0, 1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Mat randn(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  Mat rand_uniform(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = uniform();
    return m;
  }

  Vec randn_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  // G^T G + shift I: symmetric positive definite by construction.
  Mat spd(Index n, double shift = 0.5) {
    Mat G = randn(n, n);
    Mat S = G.transpose() * G / static_cast<double>(n);
    S += shift * Mat::Identity(n, n);
    return symmetrize(S);
  }

  // Diagonally dominant shift keeps the spectrum away from the imaginary
  // axis, which keeps Sylvester operators well conditioned in tests.
  Mat well_conditioned(Index n, double shift = 2.0) {
    Mat A = randn(n, n) / std::sqrt(static_cast<double>(n));
    A += shift * Mat::Identity(n, n);
    return A;
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace quasilin
