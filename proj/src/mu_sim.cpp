#include "per/mu_sim.hpp"

#include <algorithm>
#include <cmath>

#include "per/errors.hpp"
#include "per/parallel.hpp"

namespace per {

std::string to_string(MuGenerator g) {
  switch (g) {
    case MuGenerator::DirichletColumn: return "dirichlet_column";
    case MuGenerator::UniformRescaled: return "uniform_rescaled";
    case MuGenerator::UniformIid: return "uniform_iid";
  }
  return "unknown";
}

MuGenerator parse_mu_generator(const std::string& name) {
  if (name == "dirichlet_column") return MuGenerator::DirichletColumn;
  if (name == "uniform_rescaled") return MuGenerator::UniformRescaled;
  if (name == "uniform_iid") return MuGenerator::UniformIid;
  throw ConfigError("unknown generator '" + name + "'");
}

ConfusionMatrix random_confusion_matrix(std::size_t dim, MuGenerator generator, RngStream& stream) {
  if (dim < 2) throw ConfigError("confusion dimension must be at least 2");
  Matrix c(dim, dim);
  switch (generator) {
    case MuGenerator::DirichletColumn: {
      for (std::size_t j = 0; j < dim; ++j) {
        const double error = uniform_at(stream, stream.counter++);
        const auto u = uniform(stream, dim - 1);
        double total = 0.0;
        std::vector<double> w(dim - 1);
        for (std::size_t k = 0; k < w.size(); ++k) total += (w[k] = -std::log1p(-u[k]));
        std::size_t k = 0;
        for (std::size_t i = 0; i < dim; ++i) {
          if (i == j) continue;
          c(i, j) = total > 0.0 ? error * (w[k] / total) : error / static_cast<double>(dim - 1);
          ++k;
        }
      }
      break;
    }
    case MuGenerator::UniformRescaled: {
      for (std::size_t j = 0; j < dim; ++j) {
        const auto u = uniform(stream, dim - 1);
        double total = 0.0;
        for (double v : u) total += v;
        double scale = 1.0;
        if (total > 1.0) scale = uniform_at(stream, stream.counter++) / total;
        std::size_t k = 0;
        for (std::size_t i = 0; i < dim; ++i)
          if (i != j) c(i, j) = u[k++] * scale;
      }
      break;
    }
    case MuGenerator::UniformIid: {
      const double inv = 1.0 / static_cast<double>(dim - 1);
      for (std::size_t j = 0; j < dim; ++j) {
        const auto u = uniform(stream, dim - 1);
        std::size_t k = 0;
        for (std::size_t i = 0; i < dim; ++i)
          if (i != j) c(i, j) = u[k++] * inv;
      }
      break;
    }
  }
  return ConfusionMatrix(std::move(c), {});
}

void MuSimConfig::validate() const {
  if (dims.empty()) throw ConfigError("at least one dimension is required");
  for (std::size_t d : dims)
    if (d < 2) throw ConfigError("dimensions must be at least 2");
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MuSummary summarize_mu(std::size_t dim, std::vector<double> samples, bool keep_samples) {
  MuSummary s;
  s.dim = dim;
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  std::vector<double> dev(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) dev[i] = std::abs(sorted[i] - s.median);
  std::sort(dev.begin(), dev.end());
  s.mad = quantile_sorted(dev, 0.5);
  const double bound = std::sqrt(static_cast<double>(dim));
  std::size_t above = 0;
  for (double v : samples)
    if (v > bound) ++above;
  s.fraction_above_sqrt_dim = static_cast<double>(above) / static_cast<double>(samples.size());
  if (keep_samples) s.samples = std::move(samples);
  return s;
}

MuSimReport run_mu_simulation(const MuSimConfig& cfg) {
  cfg.validate();
  MuSimReport report;
  report.generator = cfg.generator;
  report.seed = cfg.seed;
  report.trials = cfg.trials;
  for (std::size_t d : cfg.dims) {
    const RngStream base = RngStream::make(cfg.seed, StreamDomain::MuSim, d);
    std::vector<double> mu(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
      RngStream s = base.substream(t);
      mu[t] = mu_ratio(random_confusion_matrix(d, cfg.generator, s));
    });
    report.per_dim.push_back(summarize_mu(d, std::move(mu), cfg.keep_samples));
  }
  return report;
}

}  // namespace per
