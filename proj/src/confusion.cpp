#include "per/confusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "per/certify.hpp"
#include "per/errors.hpp"
#include "per/parallel.hpp"

namespace per {

namespace {

constexpr double kColumnSlack = 1e-12;

void check_dataset(const Network& net, const Dataset& data) {
  data.validate();
  if (data.num_classes != net.num_classes())
    throw ConfigError("dataset has " + std::to_string(data.num_classes) + " classes, network has " +
                      std::to_string(net.num_classes()));
  if (data.dim() != net.input_dim()) throw InputError("dataset feature width differs from network input");
  data.require_all_classes();
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(Matrix entries, std::vector<std::size_t> class_counts)
    : entries_(std::move(entries)), class_counts_(std::move(class_counts)) {
  const std::size_t d = entries_.rows();
  if (d < 2 || entries_.cols() != d) throw InputError("confusion matrix must be square with d >= 2");
  if (!class_counts_.empty() && class_counts_.size() != d)
    throw InputError("class count vector length differs from matrix dimension");
  for (std::size_t j = 0; j < d; ++j) {
    if (entries_(j, j) != 0.0) throw InputError("confusion matrix diagonal must be zero");
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = entries_(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("confusion entries must be finite and >= 0");
      s += v;
    }
    if (s > 1.0 + kColumnSlack) throw InputError("confusion column " + std::to_string(j) + " sums above 1");
  }
}

ConfusionMatrix ConfusionMatrix::from_counts(const Matrix& counts,
                                             const std::vector<std::size_t>& class_counts) {
  const std::size_t d = counts.rows();
  Matrix entries(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    if (class_counts.at(j) == 0) throw ConfigError("class " + std::to_string(j) + " has no samples");
    const double inv = 1.0 / static_cast<double>(class_counts[j]);
    for (std::size_t i = 0; i < d; ++i)
      if (i != j) entries(i, j) = counts(i, j) * inv;
  }
  return ConfusionMatrix(std::move(entries), class_counts);
}

std::vector<double> ConfusionMatrix::column_sums() const {
  std::vector<double> s(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) s[j] += entries_(i, j);
  return s;
}

bool ConfusionMatrix::is_zero() const {
  const auto d = entries_.data();
  return std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
}

ConfusionMatrix confusion_from_predictions(const Dataset& data, const std::vector<std::size_t>& predictions) {
  if (predictions.size() != data.size()) throw InputError("prediction count differs from dataset size");
  data.require_all_classes();
  const std::size_t d = data.num_classes;
  Matrix counts(d, d);
  for (std::size_t q = 0; q < data.size(); ++q) {
    const std::size_t j = data.labels[q];
    const std::size_t i = predictions[q];
    if (i >= d) throw InputError("prediction out of range");
    if (i != j) counts(i, j) += 1.0;
  }
  return ConfusionMatrix::from_counts(counts, data.class_counts());
}

ConfusionMatrix build_confusion_matrix(const Network& net, const Dataset& data) {
  check_dataset(net, data);
  std::vector<std::size_t> pred(data.size());
  for (std::size_t q = 0; q < data.size(); ++q) pred[q] = argmax(forward(net, data.sample(q)));
  return confusion_from_predictions(data, pred);
}

ConfusionMatrix build_margin_confusion_matrix(const Network& net, const Dataset& data, double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("margin must be nonnegative");
  check_dataset(net, data);
  const std::size_t d = data.num_classes;
  Matrix counts(d, d);
  for (std::size_t q = 0; q < data.size(); ++q) {
    const auto f = forward(net, data.sample(q));
    const std::size_t y = data.labels[q];
    std::size_t wrong = y == 0 ? 1 : 0;
    for (std::size_t i = 0; i < d; ++i)
      if (i != y && f[i] > f[wrong]) wrong = i;
    if (f[y] <= gamma + f[wrong]) counts(wrong, y) += 1.0;
  }
  return ConfusionMatrix::from_counts(counts, data.class_counts());
}

std::vector<std::size_t> margin_smoothed_predictions(const Network& net, const Dataset& data,
                                                      double gamma, double sigma, std::size_t n_noise,
                                                      const RngStream& stream, std::size_t workers) {
  if (n_noise < 1) throw ConfigError("n_noise must be at least 1");
  check_dataset(net, data);
  std::vector<std::size_t> pred(data.size());
  parallel_for(data.size(), workers, [&](std::size_t q) {
    pred[q] = margin_smoothed_predict(net, data.sample(q), data.labels[q], gamma, sigma, n_noise,
                                      stream.substream(q));
  });
  return pred;
}

ConfusionMatrix build_smoothed_confusion_matrix(const Network& net, const Dataset& data, double gamma,
                                                double sigma, std::size_t n_noise,
                                                const RngStream& stream, std::size_t workers) {
  return confusion_from_predictions(
      data, margin_smoothed_predictions(net, data, gamma, sigma, n_noise, stream, workers));
}

SingularTriple top_singular_triple(const Matrix& c, double tolerance, std::size_t max_iterations) {
  const std::size_t d = c.cols();
  SingularTriple t;
  std::vector<double> start(d, 1.0);
  auto r = power_iteration(c, start, max_iterations, tolerance);
  if (!(r.sigma > 0.0)) {
    t.degenerate = true;
    t.u_hat.assign(c.rows(), 0.0);
    t.v_hat.assign(d, 0.0);
    t.u_hat[0] = 1.0;
    t.v_hat[0] = 1.0;
    return t;
  }
  double sum = 0.0;
  for (double v : r.right) sum += v;
  if (sum < 0.0) {
    for (double& v : r.right) v = -v;
    for (double& v : r.left) v = -v;
  }
  t.sigma_max = r.sigma;
  t.u_hat = std::move(r.left);
  t.v_hat = std::move(r.right);
  return t;
}

SingularTriple top_singular_triple(const ConfusionMatrix& c, double tolerance, std::size_t max_iterations) {
  return top_singular_triple(c.entries(), tolerance, max_iterations);
}

GradientCoefficients gradient_coefficient_matrix(const SingularTriple& t) {
  GradientCoefficients out;
  const std::size_t rows = t.u_hat.size();
  const std::size_t cols = t.v_hat.size();
  out.g = Matrix(rows, cols);
  out.degenerate = t.degenerate;
  if (t.degenerate) return out;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out.g(i, j) = t.u_hat[i] * t.v_hat[j];
  return out;
}

double max_column_sum(const Matrix& c) {
  double best = 0.0;
  for (std::size_t j = 0; j < c.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i) s += std::abs(c(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_column_sum(const ConfusionMatrix& c) { return max_column_sum(c.entries()); }

double mu_ratio(const Matrix& c) {
  const auto t = top_singular_triple(c);
  if (t.degenerate) throw NumericError("mu is undefined for a zero confusion matrix");
  return max_column_sum(c) / t.sigma_max;
}

double mu_ratio(const ConfusionMatrix& c) { return mu_ratio(c.entries()); }

std::string confusion_to_csv(const ConfusionMatrix& c) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < c.dim(); ++i) {
    for (std::size_t j = 0; j < c.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", c(i, j));
      if (j > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_confusion_csv(const ConfusionMatrix& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << confusion_to_csv(c);
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace per
