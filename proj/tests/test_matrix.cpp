#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "per/matrix.hpp"

using namespace per;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  Matrix m(r, c);
  for (double& v : m.data()) v = n01(gen);
  return m;
}

}  // namespace

TEST(SpectralNorm, Diagonal) {
  Matrix m(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  EXPECT_NEAR(spectral_norm(m), 3.0, 1e-12);
}

TEST(SpectralNorm, Permutation) {
  Matrix m(2, 2, {0.0, 1.0, 1.0, 0.0});
  EXPECT_NEAR(spectral_norm(m), 1.0, 1e-12);
}

TEST(SpectralNorm, ZeroMatrix) { EXPECT_EQ(spectral_norm(Matrix(3, 4)), 0.0); }

TEST(SpectralNorm, StartVectorInNullSpace) {
  // The all-ones direction is in the null space; the column-norm check recovers.
  Matrix m(1, 2, {1.0, -1.0});
  EXPECT_NEAR(spectral_norm(m), std::sqrt(2.0), 1e-9);
}

TEST(SpectralNorm, MatchesJacobiOracle) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(5, 5, gen);
    EXPECT_NEAR(spectral_norm(m), oracle::singular_values(m)[0], 1e-6);
  }
}

TEST(FrobeniusNorm, Basics) {
  EXPECT_EQ(frobenius_norm(Matrix(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(Matrix(1, 2, {3.0, 4.0})), 5.0);
}

TEST(FrobeniusNorm, EqualsRootSumOfSquaredSingularValues) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = random_matrix(4, 6, gen);
    double s = 0.0;
    for (double v : oracle::singular_values(m)) s += v * v;
    EXPECT_NEAR(frobenius_norm(m), std::sqrt(s), 1e-9);
  }
}

TEST(SpectralNorm, HomogeneousAndBelowFrobenius) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_matrix(3 + trial % 4, 2 + trial % 5, gen);
    const double c = scale(gen);
    const double s = spectral_norm(m);
    EXPECT_NEAR(spectral_norm(c * m), std::abs(c) * s, 1e-8 * std::max(1.0, std::abs(c) * s));
    EXPECT_LE(s, frobenius_norm(m) * (1.0 + 1e-12));
  }
}

TEST(Matrix, RejectsBadDataLength) { EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), std::exception); }
