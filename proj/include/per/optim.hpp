#pragma once

#include <cstdint>
#include <vector>

#include "per/matrix.hpp"
#include "per/network.hpp"

namespace per {

struct SgdParams {
  double learning_rate = 0.001;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

/// Network plus SGD momentum buffers.
struct TrainState {
  Network network;
  std::vector<Matrix> momentum_buffers;
  SgdParams params;
  std::uint64_t step = 0;

  TrainState() = default;
  TrainState(Network net, SgdParams p);
};

/// buffer ← momentum·buffer + grad;  W ← (1 − lr·wd)·W − lr·buffer.
void sgd_step(TrainState& state, const std::vector<Matrix>& gradients);

}  // namespace per
