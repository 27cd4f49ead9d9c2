// Copyright 2026 The modular-ppt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reproducible sampling. Uses SplitMix64 (Steele, Lea & Flood 2014): the
// n-th output of stream `seed` is mix(seed + n * 0x9E3779B97F4A7C15), so a
// (seed, counter) pair fully determines every draw on every platform.
// Normal deviates use Box-Muller.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace modular_ppt {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Standard complex normal: real and imaginary parts have variance 1/2.
  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of the `stream`-th independent substream of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64::mix(seed ^ SplitMix64::mix(stream + 0x632BE59BD9B4E019ULL));
}

namespace random {

inline Eigen::MatrixXcd gaussian(Eigen::Index rows, Eigen::Index cols,
                                 SplitMix64& rng) {
  Eigen::MatrixXcd g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  return g;
}

inline Eigen::VectorXcd unit_vector(Eigen::Index n, SplitMix64& rng) {
  Eigen::VectorXcd v = gaussian(n, 1, rng);
  return v / v.norm();
}

/// Hermitian matrix with unit Frobenius norm.
inline Eigen::MatrixXcd hermitian(Eigen::Index n, SplitMix64& rng) {
  const Eigen::MatrixXcd g = gaussian(n, n, rng);
  Eigen::MatrixXcd h = (g + g.adjoint()) / 2.0;
  return h / h.norm();
}

/// G G^dagger with G of size n x rank, normalized to unit trace.
inline Eigen::MatrixXcd psd(Eigen::Index n, SplitMix64& rng,
                            Eigen::Index rank = -1) {
  const Eigen::MatrixXcd g = gaussian(n, rank < 0 ? n : rank, rng);
  Eigen::MatrixXcd p = g * g.adjoint();
  p /= p.trace().real();
  return (p + p.adjoint()) / 2.0;
}

/// Unit-trace density with spectrum bounded below by mix / n.
inline Eigen::MatrixXcd faithful_density(Eigen::Index n, SplitMix64& rng,
                                         double mix = 0.1) {
  Eigen::MatrixXcd d = (1.0 - mix) * psd(n, rng);
  d.diagonal().array() += mix / static_cast<double>(n);
  return d;
}

inline Eigen::MatrixXcd pure_state(Eigen::Index n, SplitMix64& rng) {
  const Eigen::VectorXcd v = unit_vector(n, rng);
  return v * v.adjoint();
}

/// Arbitrary complex matrix with unit Frobenius norm.
inline Eigen::MatrixXcd generic(Eigen::Index rows, Eigen::Index cols,
                                SplitMix64& rng) {
  Eigen::MatrixXcd g = gaussian(rows, cols, rng);
  return g / g.norm();
}

}  // namespace random
}  // namespace modular_ppt
