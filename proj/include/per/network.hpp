#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "per/matrix.hpp"
#include "per/rng.hpp"

namespace per {

/// ReLU feed-forward classifier. Layer l maps d_{l-1} inputs to d_l outputs
/// through a d_l × (d_{l-1} + 1) matrix whose last column is the bias.
/// No activation follows the last layer.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Matrix> layers);

  /// He-uniform weights (bound √(6/fan_in)), zero biases.
  /// `dims` = {input_dim, hidden..., num_classes}.
  static Network he_uniform(std::span<const std::size_t> dims, RngStream stream);

  std::size_t input_dim() const;
  std::size_t num_classes() const;
  std::size_t depth() const { return layers_.size(); }
  /// Largest layer output width.
  std::size_t max_width() const;

  const std::vector<Matrix>& layers() const { return layers_; }
  std::vector<Matrix>& mutable_layers() { return layers_; }
  const Matrix& layer(std::size_t l) const { return layers_[l]; }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Matrix> layers_;
};

/// Pre-softmax logits.
std::vector<double> forward(const Network& net, std::span<const double> x);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

enum class LossKind { CrossEntropy, MarginKlSurrogate };

double cross_entropy_loss(std::span<const double> logits, std::size_t label);

/// −log softmax(logits + γ·(1 − onehot(label)))[label].
double margin_kl_surrogate_loss(std::span<const double> logits, std::size_t label, double gamma);

/// Weighted sum of the two losses sharing one forward pass: total =
/// ce_weight·CE + surrogate_weight·surrogate(γ).
struct LossMix {
  double ce_weight = 1.0;
  double surrogate_weight = 0.0;
  double gamma = 0.0;
};

struct Gradients {
  std::vector<Matrix> layers;
  double loss = 0.0;
};

Gradients backward(const Network& net, std::span<const double> x, std::size_t label,
                   const LossMix& mix);
Gradients backward(const Network& net, std::span<const double> x, std::size_t label,
                   LossKind kind, double gamma = 0.0);

/// Zero gradients shaped like the network.
std::vector<Matrix> zero_gradients(const Network& net);

}  // namespace per
