#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "per/confusion.hpp"
#include "per/dataset.hpp"
#include "per/network.hpp"
#include "per/optim.hpp"

namespace per {

enum class TrainMode { Scratch, Finetune };

struct PerTrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  double gamma = 0.1;
  double sigma = 0.25;
  std::size_t n_noise_confusion = 100;
  SgdParams sgd{};
  TrainMode mode = TrainMode::Finetune;
  bool regularize = true;              // false: plain smooth training
  std::vector<std::size_t> hidden{64, 64};  // scratch architecture
  std::size_t workers = 1;

  void validate() const;
};

/// Confusion pass of one epoch: the smoothed margin confusion matrix, its
/// gradient coefficients (negatives clamped to 0) and the (i, j) cell of
/// every training sample. i == j marks a sample classified correctly.
struct EpochPlan {
  ConfusionMatrix confusion;
  SingularTriple triple;
  GradientCoefficients grads;
  std::vector<std::size_t> assigned;  // i per sample; j is the label
  bool regularizer_active = false;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean total per-sample loss
  double ce_loss = 0.0;
  double regularizer_loss = 0.0;  // mean G_ij · surrogate
  double sigma_max = 0.0;  // of the training confusion matrix built at epoch start
  double max_column_sum = 0.0;
  bool regularizer_active = false;
  std::vector<double> val_class_error;  // clean per-class error after the epoch
};

EpochPlan plan_epoch(const Network& net, const Dataset& data, const PerTrainConfig& cfg,
                     std::uint64_t seed, std::size_t epoch);

/// Regularizer weight of sample q under the plan (0 when correctly classified).
double regularizer_weight(const EpochPlan& plan, const Dataset& data, std::size_t q);

/// One epoch of Gaussian-augmented SGD with the principal-eigenvalue term.
/// `override_plan` replaces the confusion pass (tests freeze G with it).
EpochMetrics train_epoch(TrainState& state, const Dataset& data, const PerTrainConfig& cfg,
                         std::uint64_t seed, std::size_t epoch,
                         const EpochPlan* override_plan = nullptr);

/// Clean (unsmoothed) error rate per class.
std::vector<double> per_class_error(const Network& net, const Dataset& data);

struct TrainResult {
  Network network;
  std::vector<EpochMetrics> log;
};

/// Runs cfg.epochs epochs. Scratch mode initializes a fresh network
/// (sizes {dim, hidden..., classes}); finetune mode starts from `initial`.
TrainResult smooth_train(const Dataset& train, const Dataset& val, const PerTrainConfig& cfg,
                         std::uint64_t seed, const std::optional<Network>& initial = std::nullopt);

}  // namespace per
