#include "per/optim.hpp"

#include <string>

#include "per/errors.hpp"

namespace per {

TrainState::TrainState(Network net, SgdParams p)
    : network(std::move(net)), momentum_buffers(zero_gradients(network)), params(p) {
  if (!(p.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(p.momentum >= 0.0 && p.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(p.weight_decay >= 0.0)) throw ConfigError("weight decay must be nonnegative");
}

void sgd_step(TrainState& state, const std::vector<Matrix>& gradients) {
  auto& layers = state.network.mutable_layers();
  if (gradients.size() != layers.size()) throw InputError("gradient count differs from layer count");
  const double lr = state.params.learning_rate;
  const double decay = 1.0 - lr * state.params.weight_decay;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (!gradients[l].same_shape(layers[l]))
      throw InputError("gradient shape mismatch at layer " + std::to_string(l));
    auto w = layers[l].data();
    auto buf = state.momentum_buffers[l].data();
    auto g = gradients[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      buf[i] = state.params.momentum * buf[i] + g[i];
      w[i] = decay * w[i] - lr * buf[i];
    }
    if (!layers[l].all_finite()) throw NumericError("non-finite weights after SGD step");
  }
  ++state.step;
}

}  // namespace per
