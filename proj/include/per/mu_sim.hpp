#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "per/confusion.hpp"
#include "per/rng.hpp"

namespace per {

enum class MuGenerator {
  DirichletColumn,  // column error e_j ~ U(0,1) split by Dirichlet(1,…,1)
  UniformRescaled,  // U(0,1) cells; columns over 1 rescaled to sum U(0,1)
  UniformIid,       // U(0,1) cells divided by d − 1
};

std::string to_string(MuGenerator g);
MuGenerator parse_mu_generator(const std::string& name);

ConfusionMatrix random_confusion_matrix(std::size_t dim, MuGenerator generator, RngStream& stream);

struct MuSimConfig {
  std::vector<std::size_t> dims{10, 20, 50, 100};
  std::size_t trials = 10000;
  MuGenerator generator = MuGenerator::DirichletColumn;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool keep_samples = false;

  void validate() const;
};

struct MuSummary {
  std::size_t dim = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double mad = 0.0;  // median absolute deviation
  double fraction_above_sqrt_dim = 0.0;
  std::vector<double> samples;  // filled when keep_samples
};

struct MuSimReport {
  MuGenerator generator = MuGenerator::DirichletColumn;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<MuSummary> per_dim;
};

/// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

MuSummary summarize_mu(std::size_t dim, std::vector<double> samples, bool keep_samples);

/// Trial t at dimension d draws from RngStream::make(seed, MuSim, d).substream(t).
MuSimReport run_mu_simulation(const MuSimConfig& cfg);

}  // namespace per
