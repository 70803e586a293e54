#include <gtest/gtest.h>

#include <cmath>

#include "per/errors.hpp"
#include "per/mu_sim.hpp"

using namespace per;

namespace {

void expect_same(const MuSummary& a, const MuSummary& b) {
  EXPECT_EQ(a.dim, b.dim);
  EXPECT_EQ(a.min, b.min);
  EXPECT_EQ(a.q1, b.q1);
  EXPECT_EQ(a.median, b.median);
  EXPECT_EQ(a.q3, b.q3);
  EXPECT_EQ(a.max, b.max);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.mad, b.mad);
  EXPECT_EQ(a.samples, b.samples);
}

}  // namespace

TEST(MuGenerator, NamesRoundTrip) {
  for (auto g : {MuGenerator::DirichletColumn, MuGenerator::UniformRescaled, MuGenerator::UniformIid})
    EXPECT_EQ(parse_mu_generator(to_string(g)), g);
  EXPECT_THROW(parse_mu_generator("gaussian"), ConfigError);
}

TEST(RandomConfusion, AlwaysValid) {
  RngStream s = RngStream::make(1, StreamDomain::Test);
  for (auto g : {MuGenerator::DirichletColumn, MuGenerator::UniformRescaled, MuGenerator::UniformIid}) {
    for (int t = 0; t < 100000; ++t) {
      const std::size_t d = 2 + t % 5;
      const auto c = random_confusion_matrix(d, g, s);  // constructor enforces the invariants
      ASSERT_EQ(c.dim(), d);
      for (double v : c.column_sums()) ASSERT_LE(v, 1.0 + 1e-12);
    }
  }
}

TEST(RandomConfusion, TwoClassDirichletUsesErrorRatesDirectly) {
  const RngStream start = RngStream::make(2, StreamDomain::Test);
  RngStream s = start;
  const auto c = random_confusion_matrix(2, MuGenerator::DirichletColumn, s);
  // Column j consumes its error rate then one split weight.
  EXPECT_EQ(c(1, 0), uniform_at(start, 0));
  EXPECT_EQ(c(0, 1), uniform_at(start, 2));
}

TEST(RandomConfusion, MeanColumnSumIsOneHalf) {
  RngStream s = RngStream::make(3, StreamDomain::Test);
  double total = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < 100000; ++t) {
    for (double v : random_confusion_matrix(4, MuGenerator::DirichletColumn, s).column_sums()) {
      total += v;
      ++n;
    }
  }
  EXPECT_NEAR(total / n, 0.5, 0.01);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{1.0, 2.0, 4.0, 8.0};
  EXPECT_EQ(quantile_sorted(v, 0.0), 1.0);
  EXPECT_EQ(quantile_sorted(v, 1.0), 8.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 1.75);
  const auto s = summarize_mu(4, {8.0, 1.0, 4.0, 2.0}, false);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 8.0);
  EXPECT_DOUBLE_EQ(s.mean, 3.75);
  EXPECT_DOUBLE_EQ(s.fraction_above_sqrt_dim, 0.5);
}

TEST(MuSimulation, SingleTrial) {
  MuSimConfig cfg;
  cfg.dims = {6};
  cfg.trials = 1;
  cfg.seed = 4;
  const auto r = run_mu_simulation(cfg);
  RngStream s = RngStream::make(4, StreamDomain::MuSim, 6).substream(0);
  const double mu = mu_ratio(random_confusion_matrix(6, cfg.generator, s));
  const auto& p = r.per_dim.at(0);
  for (double v : {p.min, p.q1, p.median, p.q3, p.max, p.mean}) EXPECT_EQ(v, mu);
  EXPECT_EQ(p.mad, 0.0);
}

TEST(MuSimulation, BoundedAndDeterministic) {
  MuSimConfig cfg;
  cfg.dims = {5, 10, 20};
  cfg.trials = 500;
  cfg.seed = 5;
  cfg.keep_samples = true;
  const auto a = run_mu_simulation(cfg);
  cfg.workers = 3;
  const auto b = run_mu_simulation(cfg);
  ASSERT_EQ(a.per_dim.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    expect_same(a.per_dim[k], b.per_dim[k]);
    EXPECT_EQ(a.per_dim[k].fraction_above_sqrt_dim, 0.0);
    const double bound = std::sqrt(static_cast<double>(cfg.dims[k]));
    for (double v : a.per_dim[k].samples) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, bound);
    }
    const auto& s = a.per_dim[k];
    EXPECT_LE(s.min, s.q1);
    EXPECT_LE(s.q1, s.median);
    EXPECT_LE(s.median, s.q3);
    EXPECT_LE(s.q3, s.max);
  }
}

TEST(MuSimulation, SpreadShrinksWithDimension) {
  MuSimConfig cfg;
  cfg.dims = {10, 20, 50, 100};
  cfg.trials = 1000;
  std::vector<double> mad(4, 0.0), iqr(4, 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto r = run_mu_simulation(cfg);
    for (std::size_t k = 0; k < 4; ++k) {
      mad[k] += r.per_dim[k].mad / 5.0;
      iqr[k] += (r.per_dim[k].q3 - r.per_dim[k].q1) / 5.0;
    }
  }
  for (std::size_t k = 1; k < 4; ++k) EXPECT_LE(mad[k], mad[k - 1]) << cfg.dims[k];
  EXPECT_LT(iqr[3], iqr[0]);
}

TEST(MuSimConfig, Validation) {
  MuSimConfig cfg;
  cfg.dims = {1};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dims = {3};
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
