#include "per/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "per/errors.hpp"
#include "per/rng.hpp"

namespace per {

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t y : labels) ++counts.at(y);
  return counts;
}

std::size_t Dataset::min_class_count() const {
  const auto counts = class_counts();
  return counts.empty() ? 0 : *std::min_element(counts.begin(), counts.end());
}

double Dataset::max_row_norm() const {
  double b = 0.0;
  for (std::size_t q = 0; q < size(); ++q) b = std::max(b, norm2(sample(q)));
  return b;
}

void Dataset::require_all_classes() const {
  const auto counts = class_counts();
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] == 0) throw ConfigError("class " + std::to_string(j) + " has no samples");
}

void Dataset::validate() const {
  if (features.rows() != labels.size()) throw InputError("feature rows differ from label count");
  if (num_classes < 2) throw ConfigError("dataset needs at least two classes");
  for (std::size_t y : labels)
    if (y >= num_classes) throw InputError("label " + std::to_string(y) + " out of range");
}

std::vector<double> synthetic_center(const SyntheticSpec& spec, std::size_t k) {
  std::vector<double> c(spec.dim, 0.0);
  const double angle =
      2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(spec.class_sizes.size());
  c[0] = spec.center_radius * std::cos(angle);
  if (spec.dim > 1) c[1] = spec.center_radius * std::sin(angle);
  return c;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.class_sizes.size() < 2) throw ConfigError("synthetic data needs at least two classes");
  if (spec.dim < 1) throw ConfigError("synthetic data needs dim >= 1");
  if (!(spec.cluster_std >= 0.0) || !(spec.center_radius >= 0.0))
    throw ConfigError("cluster geometry must be nonnegative");
  for (std::size_t k = 0; k < spec.class_sizes.size(); ++k)
    if (spec.class_sizes[k] < 1) throw ConfigError("class " + std::to_string(k) + " has size 0");

  std::size_t m = 0;
  for (std::size_t s : spec.class_sizes) m += s;
  Dataset data;
  data.num_classes = spec.class_sizes.size();
  data.features = Matrix(m, spec.dim);
  data.labels.reserve(m);
  std::size_t q = 0;
  for (std::size_t k = 0; k < spec.class_sizes.size(); ++k) {
    const auto center = synthetic_center(spec, k);
    RngStream stream = RngStream::make(spec.seed, StreamDomain::Data, k);
    for (std::size_t i = 0; i < spec.class_sizes[k]; ++i, ++q) {
      const auto noise = gaussian_vector(stream, spec.dim, spec.cluster_std);
      auto row = data.features.row(q);
      for (std::size_t c = 0; c < spec.dim; ++c) row[c] = center[c] + noise[c];
      data.labels.push_back(k);
    }
  }
  return data;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  // strtod accepts forms from_chars rejects on older toolchains (leading '+').
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

bool parse_label(std::string_view s, std::size_t& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    std::size_t label = 0;
    if (!parse_label(fields[0], label)) {
      if (first_content) {
        first_content = false;
        continue;  // header
      }
      throw DataError("line " + std::to_string(line_no) + ": invalid label '" + std::string(fields[0]) + "'");
    }
    first_content = false;
    if (fields.size() < 2) throw DataError("line " + std::to_string(line_no) + ": no feature columns");
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(fields.size()));
    }
    if (options.num_classes && label >= *options.num_classes)
      throw DataError("line " + std::to_string(line_no) + ": label " + std::to_string(label) +
                      " >= number of classes " + std::to_string(*options.num_classes));
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        throw DataError("line " + std::to_string(line_no) + ": non-numeric field '" +
                        std::string(fields[c]) + "'");
      values.push_back(v);
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw DataError("no data rows");
  Dataset data;
  data.features = Matrix(labels.size(), width - 1, std::move(values));
  data.labels = std::move(labels);
  data.num_classes = options.num_classes
                         ? *options.num_classes
                         : *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  if (data.num_classes < 2) data.num_classes = 2;
  if (options.normalize) normalize_features(data);
  return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << std::setprecision(17);
  for (std::size_t q = 0; q < data.size(); ++q) {
    out << data.labels[q];
    for (double v : data.sample(q)) out << ',' << v;
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

void normalize_features(Dataset& data) {
  const double b = data.max_row_norm();
  if (!(b > 0.0)) return;
  for (double& v : data.features.data()) v /= b;
}

}  // namespace per
