#pragma once

#include "ll1/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ll1 {

// Seeded Gaussian source built from mt19937_64 and the Box-Muller transform.
// Uniforms are taken as the top 53 bits of the engine output, so streams are
// independent of the standard library's distribution implementations.
class SeededRng {
 public:
  static constexpr const char* kAlgorithmId = "mt19937_64+box-muller";

  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite
    const double u1 =
        static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Column-major fill order.
  Matrix gaussian_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = gaussian();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ll1
