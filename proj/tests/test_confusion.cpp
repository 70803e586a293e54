#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "per/certify.hpp"
#include "per/confusion.hpp"
#include "per/errors.hpp"

using namespace per;

namespace {

double sigma_of(const Matrix& m) { return top_singular_triple(m, 1e-13, 100000).sigma_max; }

Dataset blob_data(std::size_t per_class, std::size_t classes, std::uint64_t seed) {
  Dataset d;
  d.num_classes = classes;
  d.features = Matrix(per_class * classes, 2);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  for (std::size_t q = 0; q < per_class * classes; ++q) {
    d.labels.push_back(q % classes);
    d.features(q, 0) = n01(gen);
    d.features(q, 1) = n01(gen);
  }
  return d;
}

Network random_net(std::size_t classes, std::uint64_t seed) {
  const std::vector<std::size_t> dims{2, 10, classes};
  return Network::he_uniform(dims, RngStream::make(seed, StreamDomain::Test));
}

std::mt19937_64& shared_gen() {
  static std::mt19937_64 gen(2024);
  return gen;
}

double u01() { return std::uniform_real_distribution<double>(0.0, 1.0)(shared_gen()); }

}  // namespace

TEST(ConfusionMatrix, RejectsInvalid) {
  EXPECT_THROW(ConfusionMatrix(Matrix(2, 2, {0.5, 0.0, 0.0, 0.0}), {}), InputError);
  EXPECT_THROW(ConfusionMatrix(Matrix(2, 2, {0.0, -0.1, 0.0, 0.0}), {}), InputError);
  EXPECT_THROW(ConfusionMatrix(Matrix(3, 3, {0, 0.6, 0, 0, 0, 0, 0, 0.6, 0}), {}), InputError);
  EXPECT_THROW(ConfusionMatrix(Matrix(1, 1), {}), InputError);
  EXPECT_THROW(ConfusionMatrix(Matrix(2, 3), {}), InputError);
}

TEST(BuildConfusion, PerfectClassifierGivesZero) {
  Dataset d;
  d.num_classes = 2;
  d.features = Matrix(4, 1, {-2.0, -1.0, 1.0, 2.0});
  d.labels = {0, 0, 1, 1};
  const Network net({Matrix(2, 2, {-1.0, 0.0, 1.0, 0.0})});
  EXPECT_TRUE(build_confusion_matrix(net, d).is_zero());
}

TEST(BuildConfusion, AllSecondClassWrong) {
  Dataset d;
  d.num_classes = 2;
  d.features = Matrix(4, 1, {-2.0, -1.0, 1.0, 2.0});
  d.labels = {0, 0, 1, 1};
  const Network net({Matrix(2, 2, {0.0, 1.0, 0.0, 0.0})});  // always class 0
  const auto c = build_confusion_matrix(net, d);
  EXPECT_EQ(c(0, 1), 1.0);
  EXPECT_EQ(c(1, 0), 0.0);
  EXPECT_EQ(max_column_sum(c), 1.0);
}

TEST(BuildConfusion, MissingClassNamed) {
  Dataset d = blob_data(5, 3, 1);
  for (auto& y : d.labels)
    if (y == 2) y = 1;
  try {
    build_confusion_matrix(random_net(3, 1), d);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("class 2"), std::string::npos);
  }
}

TEST(BuildConfusion, MatchesRecount) {
  const Dataset d = blob_data(20, 3, 2);
  const Network net = random_net(3, 2);
  const auto c = build_confusion_matrix(net, d);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) {
        EXPECT_EQ(c(i, j), 0.0);
        continue;
      }
      int hits = 0, total = 0;
      for (std::size_t q = 0; q < d.size(); ++q) {
        if (d.labels[q] != j) continue;
        ++total;
        const auto f = forward(net, d.sample(q));
        std::size_t best = 0;
        for (std::size_t k = 1; k < f.size(); ++k)
          if (f[k] > f[best]) best = k;
        hits += best == i;
      }
      EXPECT_DOUBLE_EQ(c(i, j), static_cast<double>(hits) / total);
    }
}

TEST(MarginConfusion, ZeroMarginEqualsHardMatrix) {
  const Dataset d = blob_data(30, 4, 3);
  const Network net = random_net(4, 3);
  EXPECT_EQ(build_margin_confusion_matrix(net, d, 0.0), build_confusion_matrix(net, d));
}

TEST(MarginConfusion, HugeMarginSaturatesColumns) {
  const Dataset d = blob_data(10, 4, 4);
  for (double s : build_margin_confusion_matrix(random_net(4, 4), d, 1e9).column_sums())
    EXPECT_EQ(s, 1.0);
}

TEST(MarginConfusion, MatchesRecount) {
  const Dataset d = blob_data(25, 3, 5);
  const Network net = random_net(3, 5);
  const double gamma = 0.4;
  Matrix counts(3, 3);
  for (std::size_t q = 0; q < d.size(); ++q) {
    const auto f = forward(net, d.sample(q));
    const std::size_t y = d.labels[q];
    double best = -1e300;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < 3; ++i)
      if (i != y && f[i] > best) best = f[i], arg = i;
    if (f[y] <= gamma + best) counts(arg, y) += 1;
  }
  const auto c = build_margin_confusion_matrix(net, d, gamma);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(c(i, j), counts(i, j) / 25.0);
}

TEST(SmoothedConfusion, ZeroNoiseMatchesMarginAssignments) {
  const Dataset d = blob_data(20, 3, 6);
  const Network net = random_net(3, 6);
  const auto s = RngStream::make(1, StreamDomain::Test);
  for (double gamma : {0.0, 0.3}) {
    const auto pred = margin_smoothed_predictions(net, d, gamma, 0.0, 5, s);
    for (std::size_t q = 0; q < d.size(); ++q) {
      std::vector<std::size_t> counts(3, 0);
      const auto f = forward(net, d.sample(q));
      for (std::size_t c = 0; c < 3; ++c) counts[c] = margin_indicator(f, c, d.labels[q], gamma) ? 5 : 0;
      const auto want = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      EXPECT_EQ(pred[q], want);
    }
  }
}

TEST(SmoothedConfusion, SingleDrawIsHardMatrixOverNoise) {
  const Dataset d = blob_data(20, 3, 7);
  const Network net = random_net(3, 7);
  const auto s = RngStream::make(2, StreamDomain::Test);
  const double sigma = 0.5;
  std::vector<std::size_t> pred(d.size());
  for (std::size_t q = 0; q < d.size(); ++q) {
    const RngStream sq = s.substream(q);
    std::vector<double> x{d.features(q, 0) + sigma * gaussian_at(sq, 0),
                          d.features(q, 1) + sigma * gaussian_at(sq, 1)};
    pred[q] = argmax(forward(net, x));
  }
  EXPECT_EQ(build_smoothed_confusion_matrix(net, d, 0.0, sigma, 1, s), confusion_from_predictions(d, pred));
}

TEST(SmoothedConfusion, AgreesWithOversampledRun) {
  const Dataset d = blob_data(40, 3, 8);
  const Network net = random_net(3, 8);
  const auto small = build_smoothed_confusion_matrix(net, d, 0.1, 0.6, 100, RngStream::make(3, StreamDomain::Test));
  const auto big = build_smoothed_confusion_matrix(net, d, 0.1, 0.6, 10000, RngStream::make(4, StreamDomain::Test));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double p = big(i, j);
      // Smoothed predictions are near-deterministic per sample, so the slack
      // covers samples sitting near a vote tie.
      const double tol = 3.0 * std::sqrt(std::max(p * (1 - p), 0.05) / (100.0 * 40.0)) + 2.0 / 40.0;
      EXPECT_LE(std::abs(small(i, j) - p), tol) << i << "," << j;
    }
}

TEST(SmoothedConfusion, WorkersDoNotChangeResult) {
  const Dataset d = blob_data(15, 4, 9);
  const Network net = random_net(4, 9);
  const auto s = RngStream::make(5, StreamDomain::Test);
  const auto one = build_smoothed_confusion_matrix(net, d, 0.1, 0.3, 50, s, 1);
  EXPECT_EQ(build_smoothed_confusion_matrix(net, d, 0.1, 0.3, 50, s, 4), one);
}

TEST(SingularTriple, SingleEntry) {
  Matrix m(3, 3);
  m(1, 0) = 0.7;
  const auto t = top_singular_triple(m);
  EXPECT_NEAR(t.sigma_max, 0.7, 1e-12);
  EXPECT_NEAR(t.u_hat[1], 1.0, 1e-9);
  EXPECT_NEAR(t.v_hat[0], 1.0, 1e-9);
  const auto g = gradient_coefficient_matrix(t);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(g.g(i, j), (i == 1 && j == 0) ? 1.0 : 0.0, 1e-9);
}

TEST(SingularTriple, Swap) {
  EXPECT_NEAR(top_singular_triple(Matrix(2, 2, {0, 1, 1, 0})).sigma_max, 1.0, 1e-12);
  EXPECT_NEAR(mu_ratio(Matrix(2, 2, {0, 1, 1, 0})), 1.0, 1e-12);
}

TEST(SingularTriple, ZeroIsDegenerate) {
  const auto t = top_singular_triple(Matrix(4, 4));
  EXPECT_TRUE(t.degenerate);
  EXPECT_EQ(t.sigma_max, 0.0);
  EXPECT_EQ(t.u_hat[0], 1.0);
  EXPECT_EQ(t.v_hat[0], 1.0);
  EXPECT_TRUE(gradient_coefficient_matrix(t).degenerate);
  EXPECT_THROW(mu_ratio(Matrix(4, 4)), NumericError);
}

TEST(SingularTriple, MatchesJacobiOracleAndInvariants) {
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = oracle::random_zero_diagonal(10, u01);
    const auto t = top_singular_triple(m);
    EXPECT_NEAR(t.sigma_max, oracle::singular_values(m)[0], 1e-8);
    EXPECT_NEAR(norm2(t.u_hat), 1.0, 1e-9);
    EXPECT_NEAR(norm2(t.v_hat), 1.0, 1e-9);
    for (double v : t.u_hat) EXPECT_GE(v, -1e-9);
    for (double v : t.v_hat) EXPECT_GE(v, -1e-9);
    EXPECT_NEAR(frobenius_norm(gradient_coefficient_matrix(t).g), 1.0, 1e-9);
  }
}

TEST(GradientCoefficients, MatchFiniteDifferences) {
  const double eps = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_zero_diagonal(6, u01);
    const auto g = gradient_coefficient_matrix(top_singular_triple(m, 1e-13, 100000)).g;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        Matrix plus = m, minus = m;
        plus(i, j) += eps;
        minus(i, j) -= eps;
        EXPECT_NEAR((sigma_of(plus) - sigma_of(minus)) / (2 * eps), g(i, j), 1e-4);
      }
  }
}

TEST(GradientCoefficients, FirstOrderExpansionAlongRandomDirection) {
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_zero_diagonal(5, u01);
    const Matrix delta = oracle::random_zero_diagonal(5, u01);
    const auto g = gradient_coefficient_matrix(top_singular_triple(m, 1e-13, 100000)).g;
    double inner = 0.0;
    for (std::size_t k = 0; k < 25; ++k) inner += g.data()[k] * delta.data()[k];
    const double eps = 1e-6;
    Matrix moved = m;
    for (std::size_t k = 0; k < 25; ++k) moved.data()[k] += eps * delta.data()[k];
    EXPECT_NEAR((sigma_of(moved) - sigma_of(m)) / eps, inner, 1e-4);
  }
}

TEST(PerronFrobenius, IncreasingAnEntryNeverLowersSigma) {
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 2 + trial % 7;
    const Matrix m = oracle::random_zero_diagonal(d, u01);
    Matrix bumped = m;
    const std::size_t i = static_cast<std::size_t>(u01() * d) % d;
    const std::size_t j = static_cast<std::size_t>(u01() * d) % d;
    bumped(i, j) += u01() * 0.5;
    EXPECT_GE(sigma_of(bumped), sigma_of(m) - 1e-12);
  }
}

TEST(MaxColumnSum, Examples) {
  EXPECT_EQ(max_column_sum(Matrix(3, 3)), 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_zero_diagonal(7, u01);
    double best = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < 7; ++i) s += m(i, j);
      best = std::max(best, s);
    }
    EXPECT_DOUBLE_EQ(max_column_sum(m), best);
  }
}

TEST(MuRatio, SingleColumnSpreadEvenly) {
  Matrix m(10, 10);
  for (std::size_t i = 1; i < 10; ++i) m(i, 0) = 1.0 / 9.0;
  EXPECT_NEAR(mu_ratio(m), 3.0, 1e-9);
}

TEST(MuRatio, EverythingIntoOneClass) {
  Matrix m(10, 10);
  for (std::size_t j = 1; j < 10; ++j) m(0, j) = 1.0;
  EXPECT_NEAR(top_singular_triple(m).sigma_max, 3.0, 1e-9);
  EXPECT_NEAR(mu_ratio(m), 1.0 / 3.0, 1e-9);
}

TEST(MuRatio, NeverExceedsRootDimension) {
  for (std::size_t d : {2u, 5u, 10u, 20u}) {
    for (int trial = 0; trial < 1000; ++trial) {
      Matrix m = oracle::random_zero_diagonal(d, u01);
      // Sparse columns push μ toward its upper bound.
      for (double& v : m.data())
        if (u01() < 0.7) v = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += m(i, j);
        if (s > 1.0)
          for (std::size_t i = 0; i < d; ++i) m(i, j) /= s;
      }
      const ConfusionMatrix c(m, {});
      if (c.is_zero()) continue;
      EXPECT_LE(mu_ratio(c), std::sqrt(static_cast<double>(d)) + 1e-12);
    }
  }
}

TEST(ConfusionCsv, NineDigits) {
  const ConfusionMatrix c(Matrix(2, 2, {0.0, 1.0 / 3.0, 0.25, 0.0}), {3, 4});
  EXPECT_EQ(confusion_to_csv(c), "0,0.333333333\n0.25,0\n");
}
