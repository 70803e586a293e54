#include "per/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "per/errors.hpp"

namespace per {

Network::Network(std::vector<Matrix> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].rows() == 0 || layers_[l].cols() < 2)
      throw InputError("layer " + std::to_string(l) + " has an invalid shape");
    if (l > 0 && layers_[l].cols() != layers_[l - 1].rows() + 1)
      throw InputError("layer " + std::to_string(l) + " expects " +
                       std::to_string(layers_[l].cols() - 1) + " inputs but layer " +
                       std::to_string(l - 1) + " produces " + std::to_string(layers_[l - 1].rows()));
  }
}

Network Network::he_uniform(std::span<const std::size_t> dims, RngStream stream) {
  if (dims.size() < 2) throw InputError("network needs input and output dimensions");
  std::vector<Matrix> layers;
  for (std::size_t l = 1; l < dims.size(); ++l) {
    const std::size_t fan_in = dims[l - 1];
    if (fan_in == 0 || dims[l] == 0) throw InputError("layer dimensions must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix w(dims[l], fan_in + 1);
    const auto u = uniform(stream, dims[l] * fan_in);
    for (std::size_t r = 0; r < dims[l]; ++r)
      for (std::size_t c = 0; c < fan_in; ++c) w(r, c) = bound * (2.0 * u[r * fan_in + c] - 1.0);
    layers.push_back(std::move(w));
  }
  return Network(std::move(layers));
}

std::size_t Network::input_dim() const { return layers_.empty() ? 0 : layers_.front().cols() - 1; }
std::size_t Network::num_classes() const { return layers_.empty() ? 0 : layers_.back().rows(); }

std::size_t Network::max_width() const {
  std::size_t h = 0;
  for (const auto& w : layers_) h = std::max(h, w.rows());
  return h;
}

namespace {

// z = W [a; 1]
void affine(const Matrix& w, std::span<const double> a, std::vector<double>& z) {
  const std::size_t in = w.cols() - 1;
  z.assign(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto row = w.row(r);
    double s = row[in];
    for (std::size_t c = 0; c < in; ++c) s += row[c] * a[c];
    z[r] = s;
  }
}

void check_input(const Network& net, std::span<const double> x) {
  if (net.depth() == 0) throw InputError("empty network");
  if (x.size() != net.input_dim())
    throw InputError("input has length " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.input_dim()));
}

void check_label(const Network& net, std::size_t label) {
  if (label >= net.num_classes())
    throw InputError("class index " + std::to_string(label) + " out of range for " +
                     std::to_string(net.num_classes()) + " classes");
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

// softmax(z) − onehot(label), and the loss −log softmax(z)[label].
double ce_with_grad(std::span<const double> z, std::size_t label, std::vector<double>& grad) {
  const double lse = log_sum_exp(z);
  grad.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) grad[i] = std::exp(z[i] - lse);
  grad[label] -= 1.0;
  return lse - z[label];
}

std::vector<double> margin_shift(std::span<const double> logits, std::size_t label, double gamma) {
  std::vector<double> z(logits.begin(), logits.end());
  for (std::size_t i = 0; i < z.size(); ++i)
    if (i != label) z[i] += gamma;
  return z;
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> x) {
  check_input(net, x);
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    affine(layers[l], a, z);
    if (l + 1 < layers.size()) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      std::swap(a, z);
    }
  }
  return z;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double cross_entropy_loss(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) throw InputError("class index out of range");
  return log_sum_exp(logits) - logits[label];
}

double margin_kl_surrogate_loss(std::span<const double> logits, std::size_t label, double gamma) {
  if (gamma < 0.0) throw DomainError("margin must be nonnegative");
  if (label >= logits.size()) throw InputError("class index out of range");
  return cross_entropy_loss(margin_shift(logits, label, gamma), label);
}

std::vector<Matrix> zero_gradients(const Network& net) {
  std::vector<Matrix> g;
  g.reserve(net.depth());
  for (const auto& w : net.layers()) g.emplace_back(w.rows(), w.cols());
  return g;
}

Gradients backward(const Network& net, std::span<const double> x, std::size_t label,
                   const LossMix& mix) {
  check_input(net, x);
  check_label(net, label);
  if (mix.gamma < 0.0) throw DomainError("margin must be nonnegative");

  const auto& layers = net.layers();
  const std::size_t n = layers.size();
  // activations[l] is the input to layer l; pre[l] its output before ReLU.
  std::vector<std::vector<double>> activations(n);
  std::vector<std::vector<double>> pre(n);
  activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < n; ++l) {
    affine(layers[l], activations[l], pre[l]);
    if (l + 1 < n) {
      activations[l + 1] = pre[l];
      for (double& v : activations[l + 1]) v = v > 0.0 ? v : 0.0;
    }
  }

  Gradients out;
  out.layers = zero_gradients(net);
  const std::vector<double>& logits = pre[n - 1];
  std::vector<double> delta(logits.size(), 0.0);
  std::vector<double> tmp;
  if (mix.ce_weight != 0.0) {
    out.loss += mix.ce_weight * ce_with_grad(logits, label, tmp);
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] += mix.ce_weight * tmp[i];
  }
  if (mix.surrogate_weight != 0.0) {
    const auto shifted = margin_shift(logits, label, mix.gamma);
    out.loss += mix.surrogate_weight * ce_with_grad(shifted, label, tmp);
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] += mix.surrogate_weight * tmp[i];
  }

  for (std::size_t l = n; l-- > 0;) {
    const Matrix& w = layers[l];
    Matrix& g = out.layers[l];
    const std::size_t in = w.cols() - 1;
    const auto& a = activations[l];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      auto grow = g.row(r);
      for (std::size_t c = 0; c < in; ++c) grow[c] = d * a[c];
      grow[in] = d;
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      auto row = w.row(r);
      for (std::size_t c = 0; c < in; ++c) prev[c] += row[c] * d;
    }
    const auto& z = pre[l - 1];
    for (std::size_t c = 0; c < in; ++c)
      if (!(z[c] > 0.0)) prev[c] = 0.0;
    delta = std::move(prev);
  }
  return out;
}

Gradients backward(const Network& net, std::span<const double> x, std::size_t label,
                   LossKind kind, double gamma) {
  LossMix mix;
  if (kind == LossKind::CrossEntropy) {
    mix.ce_weight = 1.0;
  } else {
    mix.ce_weight = 0.0;
    mix.surrogate_weight = 1.0;
    mix.gamma = gamma;
  }
  return backward(net, x, label, mix);
}

}  // namespace per
