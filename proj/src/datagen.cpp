#include "ll1/datagen.hpp"

#include "ll1/model.hpp"
#include "ll1/projections.hpp"
#include "ll1/rng.hpp"

#include <cmath>

namespace ll1 {

SyntheticData generate_synthetic(Index image_rows, Index image_cols,
                                 Index bands, Index map_rank,
                                 Index endmembers, std::uint64_t seed) {
  ModelDims dims{image_rows, image_cols, bands, map_rank, 1.0, endmembers};
  dims.validate();
  SeededRng rng(seed);
  Matrix c = rng.gaussian_matrix(bands, endmembers).cwiseMax(0.0);
  Matrix g2 = rng.gaussian_matrix(endmembers, dims.pixel_count());
  Matrix s = project_feasible_set(g2, FeasibilityMode::ExactRank(map_rank),
                                  image_rows, image_cols)
                 .projected;
  HsiCube cube = synthesize(c, s, image_rows, image_cols);
  return {std::move(c), std::move(s), std::move(cube)};
}

HsiCube add_noise(const HsiCube& cube, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0.0) return cube;
  const double signal_power = cube.matricized().squaredNorm();
  if (signal_power == 0.0)
    throw DegenerateInputError("add_noise: zero cube");
  const double count = static_cast<double>(cube.pixel_count() * cube.bands());
  const double sigma =
      std::sqrt(signal_power / (count * std::pow(10.0, snr_db / 10.0)));
  SeededRng rng(seed);
  Matrix noisy = cube.matricized();
  for (Index j = 0; j < noisy.cols(); ++j)
    for (Index i = 0; i < noisy.rows(); ++i)
      noisy(i, j) += sigma * rng.gaussian();
  return HsiCube(cube.image_rows(), cube.image_cols(), std::move(noisy));
}

}  // namespace ll1
