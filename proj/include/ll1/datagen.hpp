#pragma once

#include "ll1/types.hpp"

#include <cstdint>

namespace ll1 {

struct SyntheticData {
  Matrix endmembers;   // K x R, nonnegative
  Matrix abundances;   // R x IJ, simplex columns, rank-L maps
  HsiCube cube;        // noiseless C*S
};

// Ground-truth factors from thresholded / alternating-projected unit-variance
// Gaussian draws, plus the clean cube. Deterministic per seed.
SyntheticData generate_synthetic(Index image_rows, Index image_cols,
                                 Index bands, Index map_rank, Index endmembers,
                                 std::uint64_t seed);

// Adds i.i.d. zero-mean Gaussian noise scaled so that
// 10*log10(||Y||_F^2 / ||N||_F^2) is snr_db in expectation. An infinite
// snr_db returns the cube unchanged.
HsiCube add_noise(const HsiCube& cube, double snr_db, std::uint64_t seed);

}  // namespace ll1
