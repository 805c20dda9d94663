#include "ll1/model.hpp"

#include "ll1/datagen.hpp"
#include "ll1/types.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace ll1;

TEST_CASE("matricize_map reshapes column-major") {
  Matrix s(1, 4);
  s << 1, 2, 3, 4;
  const Matrix map = matricize_map(s, 0, 2, 2);
  Matrix expected(2, 2);
  expected << 1, 3, 2, 4;
  CHECK(map == expected);
}

TEST_CASE("matricize/tensorize are mutually inverse") {
  const Matrix map = oracle::random_matrix(5, 7, 11);
  Matrix s(1, 35);
  s.row(0) = tensorize_map(map).transpose();
  CHECK(matricize_map(s, 0, 5, 7) == map);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(seed);
    const Index rows = 1 + static_cast<Index>(rng.uniform() * 15);
    const Index cols = 1 + static_cast<Index>(rng.uniform() * 15);
    const Index r = 1 + static_cast<Index>(rng.uniform() * 4);
    const Matrix m = rng.gaussian_matrix(r, rows * cols);
    for (Index k = 0; k < r; ++k) {
      const Matrix map_k = matricize_map(m, k, rows, cols);
      CHECK(tensorize_map(map_k).transpose() == m.row(k));
    }
  }
}

TEST_CASE("generated abundance rows round-trip through the map reshape") {
  const auto data = generate_synthetic(6, 5, 4, 2, 3, 42);
  for (Index r = 0; r < 3; ++r) {
    const Matrix map = matricize_map(data.abundances, r, 6, 5);
    CHECK(tensorize_map(map).transpose() == data.abundances.row(r));
  }
}

TEST_CASE("map_view rejects out-of-range rows") {
  const Matrix s = Matrix::Zero(2, 6);
  CHECK_THROWS_AS(matricize_map(s, 2, 2, 3), InvalidDimsError);
  CHECK_THROWS_AS(matricize_map(s, -1, 2, 3), InvalidDimsError);
  CHECK_THROWS_AS(matricize_map(s, 0, 3, 3), ShapeError);
}

TEST_CASE("synthesize multiplies factors") {
  SUBCASE("all ones") {
    const Matrix c = Matrix::Ones(4, 1);
    const Matrix s = Matrix::Ones(1, 6);
    const HsiCube cube = synthesize(c, s, 2, 3);
    CHECK(cube.matricized() == Matrix::Ones(4, 6));
    CHECK(cube.at(1, 2, 3) == 1.0);
  }
  SUBCASE("identity endmembers copy the abundance columns") {
    const Matrix c = Matrix::Identity(2, 2);
    Matrix s(2, 4);
    s.row(0).setConstant(0.3);
    s.row(1).setConstant(0.7);
    const HsiCube cube = synthesize(c, s, 2, 2);
    for (Index l = 0; l < 4; ++l) {
      CHECK(cube.matricized()(0, l) == doctest::Approx(0.3));
      CHECK(cube.matricized()(1, l) == doctest::Approx(0.7));
    }
  }
  SUBCASE("matricized view equals the product") {
    const Matrix c = oracle::random_matrix(5, 3, 1).cwiseAbs();
    const Matrix s = oracle::random_matrix(3, 12, 2).cwiseAbs();
    const HsiCube cube = synthesize(c, s, 3, 4);
    CHECK((cube.matricized() - c * s).norm() == 0.0);
    // naive triple loop as an independent check
    for (Index k = 0; k < 5; ++k)
      for (Index l = 0; l < 12; ++l) {
        double value = 0.0;
        for (Index r = 0; r < 3; ++r) value += c(k, r) * s(r, l);
        CHECK(cube.matricized()(k, l) == doctest::Approx(value).epsilon(1e-13));
      }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(synthesize(Matrix::Ones(4, 2), Matrix::Ones(3, 6), 2, 3),
                    ShapeError);
  }
}

TEST_CASE("cube pixel ordering is l = i + j*I") {
  Matrix y(2, 6);  // K=2, I=2, J=3
  for (Index l = 0; l < 6; ++l) {
    y(0, l) = static_cast<double>(l);
    y(1, l) = 100.0 + static_cast<double>(l);
  }
  const HsiCube cube(2, 3, y);
  CHECK(cube.at(0, 0, 0) == 0.0);
  CHECK(cube.at(1, 0, 0) == 1.0);
  CHECK(cube.at(0, 1, 0) == 2.0);
  CHECK(cube.at(1, 2, 1) == 105.0);
  CHECK_THROWS_AS(cube.at(2, 0, 0), InvalidDimsError);
}

TEST_CASE("objective") {
  const Matrix c = oracle::random_matrix(4, 2, 5).cwiseAbs();
  const Matrix s = oracle::random_matrix(2, 12, 6).cwiseAbs();
  const Matrix y = c * s;
  const Vector zero_theta = Vector::Zero(2);

  SUBCASE("exact fit with no regularization is zero") {
    CHECK(objective(y, c, s, 3, 4, zero_theta, 0.5, 1e-3) == 0.0);
  }
  SUBCASE("data term matches direct computation") {
    const Matrix y2 = y + oracle::random_matrix(4, 12, 7);
    const double expected = 0.5 * (y2 - c * s).squaredNorm();
    CHECK(objective(y2, c, s, 3, 4, zero_theta, 0.5, 1e-3) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("constant maps contribute the smoothing floor") {
    const double eps = 1e-3;
    const double q = 0.5;
    Matrix s_const(2, 12);
    s_const.row(0).setConstant(0.25);
    s_const.row(1).setConstant(0.75);
    const Vector theta = Vector::Ones(2);
    const double data = 0.5 * (y - c * s_const).squaredNorm();
    const double expected = data + 2.0 * (2.0 * 12.0 * std::pow(eps, q / 2));
    CHECK(objective(y, c, s_const, 3, 4, theta, q, eps) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("ties out with relative_fit when unregularized") {
    const Matrix y2 = y + 0.1 * oracle::random_matrix(4, 12, 8);
    const double fit = relative_fit(y2, c, s);
    const double obj = objective(y2, c, s, 3, 4, zero_theta, 0.5, 1e-3);
    CHECK(obj ==
          doctest::Approx(0.5 * fit * fit * y2.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("relative_fit") {
  const Matrix c = oracle::random_matrix(4, 2, 9);
  const Matrix s = oracle::random_matrix(2, 6, 10);
  const Matrix y = c * s;
  CHECK(relative_fit(y, c, s) == 0.0);
  CHECK(relative_fit(y, Matrix::Zero(4, 2), s) == doctest::Approx(1.0));
  const Matrix noise = oracle::random_matrix(4, 6, 11);
  CHECK(relative_fit(y + noise, c, s) ==
        doctest::Approx(noise.norm() / (y + noise).norm()));
  CHECK_THROWS_AS(relative_fit(Matrix::Zero(4, 6), c, s),
                  DegenerateInputError);
}

TEST_CASE("identifiability checker") {
  SUBCASE("satisfied at L=25") {
    const auto report =
        check_identifiability({100, 100, 100, 25, 1.0, 5});
    CHECK(report.satisfied);
    CHECK(report.term_sum == 13);
    CHECK(report.term_margin == 1);
    CHECK(report.pixel_margin == 10000 - 25 * 25 * 5);
  }
  SUBCASE("violated at L=30") {
    const auto report =
        check_identifiability({100, 100, 100, 30, 1.0, 5});
    CHECK_FALSE(report.satisfied);
    CHECK(report.term_sum == 11);
    CHECK(report.term_margin == -1);
    CHECK(report.pixel_margin >= 0);
  }
  SUBCASE("L above min(I, J) is invalid") {
    CHECK_THROWS_AS(check_identifiability({10, 10, 10, 11, 1.0, 2}),
                    InvalidDimsError);
  }
  SUBCASE("monotone when L decreases") {
    SeededRng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
      const Index i = 2 + static_cast<Index>(rng.uniform() * 40);
      const Index j = 2 + static_cast<Index>(rng.uniform() * 40);
      const Index k = 1 + static_cast<Index>(rng.uniform() * 40);
      const Index r = 1 + static_cast<Index>(rng.uniform() * 6);
      bool satisfied_above = false;
      for (Index l = std::min(i, j); l >= 1; --l) {
        const bool now =
            check_identifiability({i, j, k, l, 1.0, r}).satisfied;
        if (satisfied_above) CHECK(now);
        satisfied_above = satisfied_above || now;
      }
    }
  }
}
