#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "per/dataset.hpp"
#include "per/matrix.hpp"
#include "per/network.hpp"
#include "per/rng.hpp"

namespace per {

/// Zero-diagonal error matrix: entry (i, j) is the fraction of class-j
/// samples assigned to class i ≠ j.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  /// Validates: square, d ≥ 2, zero diagonal, entries ≥ 0, column sums ≤ 1.
  ConfusionMatrix(Matrix entries, std::vector<std::size_t> class_counts);

  /// From raw counts: counts(i, j) samples of class j assigned to class i.
  static ConfusionMatrix from_counts(const Matrix& counts, const std::vector<std::size_t>& class_counts);

  std::size_t dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  const std::vector<std::size_t>& class_counts() const { return class_counts_; }

  std::vector<double> column_sums() const;
  bool is_zero() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  Matrix entries_;
  std::vector<std::size_t> class_counts_;
};

/// Deterministic argmax predictions.
ConfusionMatrix build_confusion_matrix(const Network& net, const Dataset& data);

/// Entry (i, j): class-j samples with f[y] ≤ γ + f[i], i the strongest wrong class.
ConfusionMatrix build_margin_confusion_matrix(const Network& net, const Dataset& data, double gamma);

/// Per-sample margin-smoothed predictions over n_noise draws (sample q uses
/// stream.substream(q)).
std::vector<std::size_t> margin_smoothed_predictions(const Network& net, const Dataset& data,
                                                      double gamma, double sigma, std::size_t n_noise,
                                                      const RngStream& stream, std::size_t workers = 1);

/// Confusion matrix of predictions against the dataset labels.
ConfusionMatrix confusion_from_predictions(const Dataset& data, const std::vector<std::size_t>& predictions);

ConfusionMatrix build_smoothed_confusion_matrix(const Network& net, const Dataset& data, double gamma,
                                                double sigma, std::size_t n_noise,
                                                const RngStream& stream, std::size_t workers = 1);

struct SingularTriple {
  double sigma_max = 0.0;
  std::vector<double> u_hat;
  std::vector<double> v_hat;
  bool degenerate = false;
};

/// Power iteration on CᵀC from the normalized all-ones vector; û = C v̂ / σ.
/// A zero matrix yields (0, e₁, e₁) flagged degenerate.
SingularTriple top_singular_triple(const Matrix& c, double tolerance = 1e-10,
                                   std::size_t max_iterations = 10000);
SingularTriple top_singular_triple(const ConfusionMatrix& c, double tolerance = 1e-10,
                                   std::size_t max_iterations = 10000);

struct GradientCoefficients {
  Matrix g;
  bool degenerate = false;
};

/// G = û v̂ᵀ, the derivative of σ_max with respect to each entry.
GradientCoefficients gradient_coefficient_matrix(const SingularTriple& t);

double max_column_sum(const Matrix& c);
double max_column_sum(const ConfusionMatrix& c);

/// max_column_sum / σ_max; NumericError for a zero matrix.
double mu_ratio(const Matrix& c);
double mu_ratio(const ConfusionMatrix& c);

/// CSV with 9 significant digits, d rows × d columns.
std::string confusion_to_csv(const ConfusionMatrix& c);
void write_confusion_csv(const ConfusionMatrix& c, const std::string& path);

}  // namespace per
