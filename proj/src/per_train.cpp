#include "per/per_train.hpp"

#include <algorithm>
#include <cmath>

#include "per/certify.hpp"
#include "per/errors.hpp"
#include "per/parallel.hpp"

namespace per {

void PerTrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be nonnegative");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be nonnegative");
  if (n_noise_confusion < 1) throw ConfigError("confusion noise samples must be at least 1");
  if (!(sgd.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(sgd.momentum >= 0.0 && sgd.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(sgd.weight_decay >= 0.0)) throw ConfigError("weight decay must be nonnegative");
}

EpochPlan plan_epoch(const Network& net, const Dataset& data, const PerTrainConfig& cfg,
                     std::uint64_t seed, std::size_t epoch) {
  EpochPlan plan;
  const RngStream stream = RngStream::make(seed, StreamDomain::ConfusionNoise, epoch);
  plan.assigned = margin_smoothed_predictions(net, data, cfg.gamma, cfg.sigma, cfg.n_noise_confusion,
                                              stream, cfg.workers);
  plan.confusion = confusion_from_predictions(data, plan.assigned);
  plan.triple = top_singular_triple(plan.confusion);
  plan.grads = gradient_coefficient_matrix(plan.triple);
  for (double& v : plan.grads.g.data()) v = std::max(v, 0.0);
  plan.regularizer_active = cfg.regularize && !plan.grads.degenerate;
  return plan;
}

double regularizer_weight(const EpochPlan& plan, const Dataset& data, std::size_t q) {
  if (!plan.regularizer_active) return 0.0;
  const std::size_t j = data.labels[q];
  const std::size_t i = plan.assigned[q];
  return i == j ? 0.0 : plan.grads.g(i, j);
}

std::vector<double> per_class_error(const Network& net, const Dataset& data) {
  std::vector<double> wrong(data.num_classes, 0.0);
  const auto counts = data.class_counts();
  for (std::size_t q = 0; q < data.size(); ++q)
    if (argmax(forward(net, data.sample(q))) != data.labels[q]) wrong[data.labels[q]] += 1.0;
  for (std::size_t j = 0; j < wrong.size(); ++j)
    wrong[j] = counts[j] ? wrong[j] / static_cast<double>(counts[j]) : 0.0;
  return wrong;
}

EpochMetrics train_epoch(TrainState& state, const Dataset& data, const PerTrainConfig& cfg,
                         std::uint64_t seed, std::size_t epoch, const EpochPlan* override_plan) {
  cfg.validate();
  if (data.size() == 0) throw ConfigError("training set is empty");
  EpochPlan computed;
  if (override_plan == nullptr) computed = plan_epoch(state.network, data, cfg, seed, epoch);
  const EpochPlan& plan = override_plan ? *override_plan : computed;

  EpochMetrics metrics;
  metrics.epoch = epoch;
  metrics.sigma_max = plan.triple.sigma_max;
  metrics.max_column_sum = max_column_sum(plan.confusion);
  metrics.regularizer_active = plan.regularizer_active;

  RngStream shuffle = RngStream::make(seed, StreamDomain::Shuffle, epoch);
  const auto order = permutation(shuffle, data.size());
  const RngStream noise = RngStream::make(seed, StreamDomain::TrainNoise, epoch);
  const std::size_t d = data.dim();

  struct SampleResult {
    Gradients grads;
    double ce = 0.0;
    double reg = 0.0;
  };
  std::vector<SampleResult> results;
  double ce_total = 0.0;
  double reg_total = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
    const std::size_t b = end - begin;
    results.assign(b, SampleResult{});
    parallel_for(b, cfg.workers, [&](std::size_t k) {
      const std::size_t q = order[begin + k];
      RngStream s = noise.substream(q);
      auto x = gaussian_vector(s, d, cfg.sigma);
      const auto clean = data.sample(q);
      for (std::size_t c = 0; c < d; ++c) x[c] += clean[c];
      const std::size_t y = data.labels[q];
      const double w = regularizer_weight(plan, data, q);
      LossMix mix{1.0, w, cfg.gamma};
      results[k].grads = backward(state.network, x, y, mix);
      if (w != 0.0) {
        results[k].reg = w * margin_kl_surrogate_loss(forward(state.network, x), y, cfg.gamma);
        results[k].ce = results[k].grads.loss - results[k].reg;
      } else {
        results[k].ce = results[k].grads.loss;
      }
    });
    // Fixed-order reduction keeps the update independent of the worker count.
    std::vector<Matrix> total = zero_gradients(state.network);
    for (const auto& r : results) {
      for (std::size_t l = 0; l < total.size(); ++l) total[l] += r.grads.layers[l];
      ce_total += r.ce;
      reg_total += r.reg;
    }
    const double inv = 1.0 / static_cast<double>(b);
    for (auto& g : total) g *= inv;
    sgd_step(state, total);
  }
  const double m = static_cast<double>(data.size());
  metrics.ce_loss = ce_total / m;
  metrics.regularizer_loss = reg_total / m;
  metrics.train_loss = metrics.ce_loss + metrics.regularizer_loss;
  return metrics;
}

TrainResult smooth_train(const Dataset& train, const Dataset& val, const PerTrainConfig& cfg,
                         std::uint64_t seed, const std::optional<Network>& initial) {
  cfg.validate();
  train.validate();
  train.require_all_classes();
  Network net;
  if (cfg.mode == TrainMode::Finetune) {
    if (!initial) throw ConfigError("fine-tuning needs an initial network");
    net = *initial;
  } else if (initial) {
    net = *initial;
  } else {
    std::vector<std::size_t> dims{train.dim()};
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(train.num_classes);
    net = Network::he_uniform(dims, RngStream::make(seed, StreamDomain::Init));
  }
  if (net.num_classes() != train.num_classes || net.input_dim() != train.dim())
    throw ConfigError("network shape does not match the training data");

  TrainResult result;
  TrainState state(std::move(net), cfg.sgd);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    EpochMetrics m = train_epoch(state, train, cfg, seed, e);
    if (val.size() > 0) m.val_class_error = per_class_error(state.network, val);
    result.log.push_back(std::move(m));
  }
  result.network = std::move(state.network);
  return result;
}

}  // namespace per
