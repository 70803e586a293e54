#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "per/matrix.hpp"

namespace per {

/// Labelled feature matrix (one sample per row).
struct Dataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  std::span<const double> sample(std::size_t q) const { return features.row(q); }

  /// m_j for every class.
  std::vector<std::size_t> class_counts() const;
  /// Smallest class count.
  std::size_t min_class_count() const;
  /// B: the largest ℓ₂ norm of a sample.
  double max_row_norm() const;

  /// Throws ConfigError naming the first class without samples.
  void require_all_classes() const;
  void validate() const;
};

struct SyntheticSpec {
  std::vector<std::size_t> class_sizes;  // one entry per class
  std::size_t dim = 2;
  double center_radius = 1.0;  // class centers sit on a circle of this radius
  double cluster_std = 0.3;    // isotropic spread of each cluster
  std::uint64_t seed = 0;
};

/// Gaussian clusters whose centers are evenly spaced on a circle in the
/// first two coordinates.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Center used for class k by generate_synthetic.
std::vector<double> synthetic_center(const SyntheticSpec& spec, std::size_t k);

struct CsvOptions {
  bool normalize = false;                 // divide by the max row norm so B = 1
  std::optional<std::size_t> num_classes;  // inferred from labels when unset
};

/// Rows of `label,f1,...,fd`; an optional non-numeric header line is skipped.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});
void save_csv(const Dataset& data, const std::string& path);

/// Divides all features by max_row_norm(); no-op for an all-zero dataset.
void normalize_features(Dataset& data);

}  // namespace per
