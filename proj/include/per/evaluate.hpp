#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "per/certify.hpp"
#include "per/dataset.hpp"
#include "per/network.hpp"

namespace per {

/// Class with the lowest clean accuracy of the base model; ties to the lowest index.
std::size_t identify_worst_class(const Network& net, const Dataset& data);

/// Clean accuracy per class.
std::vector<double> per_class_accuracy(const Network& net, const Dataset& data);

/// Population standard deviation.
double class_std(const std::vector<double>& values);

/// CIFAR-10 and Tiny-ImageNet radius grids.
inline const std::vector<double> kCifarRadii{0.12, 0.25, 0.5, 1.0};
inline const std::vector<double> kTinyImageNetRadii{0.0, 0.05, 0.15};

struct EvalConfig {
  SmoothingConfig smoothing;  // sigma is taken from `sigmas`
  std::vector<double> sigmas{0.25};
  std::vector<double> radii = kCifarRadii;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t confusion_noise = 100;   // draws per sample for the smoothed confusion matrix
  std::optional<std::size_t> worst_class;  // pre-identified worst class; else from this model
  bool keep_outcomes = false;
};

struct RadiusMetrics {
  double radius = 0.0;
  double overall = 0.0;  // correct and radius >= r; abstentions count as errors
  std::vector<double> per_class;
  double class_std = 0.0;
  double designated_worst_accuracy = 0.0;  // at the pre-identified worst class
  std::size_t posthoc_worst_class = 0;     // argmin of per_class at this radius
  double posthoc_worst_accuracy = 0.0;
};

struct SigmaEval {
  double sigma = 0.0;
  std::vector<RadiusMetrics> radii;
  double abstention_rate = 0.0;
  double confusion_sigma_max = 0.0;  // of the test smoothed confusion matrix (γ = 0)
  double confusion_max_column_sum = 0.0;
  std::vector<CertificationOutcome> outcomes;  // filled when keep_outcomes
};

struct EvalReport {
  std::size_t worst_class = 0;
  std::vector<std::size_t> class_counts;
  std::vector<SigmaEval> sigmas;
};

/// Stream used to certify sample `index` (shared by `certify` and `evaluate`).
RngStream certification_stream(std::uint64_t seed, std::size_t index);

std::vector<CertificationOutcome> certify_dataset(const Network& net, const Dataset& data,
                                                  const SmoothingConfig& cfg, std::uint64_t seed,
                                                  std::size_t workers = 1);

/// Certified-accuracy metrics at one radius from per-sample outcomes.
RadiusMetrics radius_metrics(const Dataset& data, const std::vector<CertificationOutcome>& outcomes,
                             double radius, std::size_t worst_class);

EvalReport evaluate_certified(const Network& net, const Dataset& data, const EvalConfig& cfg);

/// B²n²h·ln(nh)·∏‖W_l‖₂²·Σ‖W_l‖_F²/‖W_l‖₂², h = widest layer.
double phi_diagnostic(const Network& net, double input_bound);

struct BoundDiagnostics {
  double phi = 0.0;
  std::vector<double> spectral_norms;
  std::vector<double> frobenius_norms;
  std::size_t depth = 0;
  std::size_t width = 0;
  double input_bound = 0.0;  // B
  std::size_t m_min = 0;
  std::size_t num_classes = 0;
  double gamma = 0.0;
  double delta = 0.0;
  double mu = 0.0;   // √d_y, the worst case
  double rhs = 0.0;  // √(μ² d_y [Φ + ln(n·m_min/δ)] / ((m_min − 8 d_y) γ²))
};

/// Throws NumericError when m_min ≤ 8·d_y (the bound is vacuous).
BoundDiagnostics bound_diagnostics(const Network& net, const Dataset& data, double gamma,
                                   double delta = 0.05);

}  // namespace per
