#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "per/network.hpp"
#include "per/rng.hpp"

namespace per {

/// Monte Carlo smoothing parameters.
struct SmoothingConfig {
  double sigma = 0.25;            // noise std, input units
  std::size_t n_selection = 100;  // N₀
  std::size_t n_estimation = 1000;  // N
  double alpha = 0.001;           // certificate failure probability
  double gamma = 0.0;             // margin; 0 for unseen data

  /// Throws ConfigError on out-of-range fields. Certification needs sigma > 0.
  void validate(bool require_positive_sigma = true) const;
};

struct CertificationOutcome {
  std::optional<std::size_t> prediction;  // nullopt = abstain
  double p_a_lower = 0.0;
  double radius = 0.0;
  std::size_t samples_used = 0;  // N₀ + N
  std::size_t candidate = 0;     // class picked by the selection phase
  std::size_t candidate_votes = 0;

  bool abstained() const { return !prediction.has_value(); }
  friend bool operator==(const CertificationOutcome&, const CertificationOutcome&) = default;
};

/// max(0, (σ/2)(Ψ⁻¹(p_a_low) − Ψ⁻¹(p_b_high))). Requires 0 < p_b_high ≤ p_a_low < 1.
double certified_radius(double p_a_low, double p_b_high, double sigma);

/// One-sided (1 − α) Clopper-Pearson lower bound on a binomial proportion
/// after k successes in n trials.
double clopper_pearson_lower(std::size_t k, std::size_t n, double alpha);

/// Votes of the base classifier over `n_draws` Gaussian perturbations of x.
/// Draw j uses elements [stream.counter + j·d, stream.counter + (j+1)·d)
/// of the stream, so splitting draws across workers never changes counts.
std::vector<std::size_t> sample_votes(const Network& net, std::span<const double> x, double sigma,
                                      std::size_t n_draws, const RngStream& stream,
                                      std::size_t workers = 1);

/// Vote counts over cfg.n_estimation draws.
std::vector<std::size_t> smoothed_predict(const Network& net, std::span<const double> x,
                                          const SmoothingConfig& cfg, const RngStream& stream,
                                          std::size_t workers = 1);

/// For every class c, the number of draws whose logits satisfy the margin
/// indicator: c = y_hint needs f[c] > max_{j≠c} f[j] + γ, c ≠ y_hint needs
/// f[c] + γ > max_{j≠c} f[j].
std::vector<std::size_t> margin_indicator_counts(const Network& net, std::span<const double> x,
                                                 std::size_t y_hint, double gamma, double sigma,
                                                 std::size_t n_draws, const RngStream& stream);

/// Per-draw margin indicator for a single logit vector.
bool margin_indicator(std::span<const double> logits, std::size_t c, std::size_t y_hint,
                      double gamma);

/// Plurality class of margin_indicator_counts, ties to the lowest index.
std::size_t margin_smoothed_predict(const Network& net, std::span<const double> x,
                                    std::size_t y_hint, double gamma, double sigma,
                                    std::size_t n_draws, const RngStream& stream);

/// Two-phase certification: draws [0, N₀) pick a candidate class, draws
/// [N₀, N₀ + N) estimate its probability. Radius is σ·Ψ⁻¹(p_a_lower) when
/// p_a_lower > 1/2, otherwise the outcome abstains.
CertificationOutcome certify(const Network& net, std::span<const double> x,
                             const SmoothingConfig& cfg, const RngStream& stream,
                             std::size_t workers = 1);

}  // namespace per
