#include "per/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "per/errors.hpp"

namespace per {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InputError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (!same_shape(other)) throw InputError("matrix shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator*(double s, Matrix m) {
  m *= s;
  return m;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InputError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw InputError("matvec: vector length differs from column count");
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) y[r] = dot(m.row(r), x);
  return y;
}

std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) throw InputError("matvec_transposed: vector length differs from row count");
  std::vector<double> y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

namespace {

bool normalize(std::vector<double>& v) {
  const double n = norm2(v);
  if (!(n > 0.0)) return false;
  for (double& x : v) x /= n;
  return true;
}

}  // namespace

PowerIterationResult power_iteration(const Matrix& m, std::vector<double> start,
                                     std::size_t max_iterations, double tolerance) {
  if (start.size() != m.cols()) throw InputError("power_iteration: start vector length mismatch");
  PowerIterationResult result;
  std::vector<double> v = std::move(start);
  if (!normalize(v)) {
    result.right = std::vector<double>(m.cols(), 0.0);
    return result;
  }
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::vector<double> next = matvec_transposed(m, matvec(m, v));
    result.iterations = it + 1;
    if (!normalize(next)) {
      // v lies in the null space of M.
      result.right = std::move(v);
      result.converged = true;
      return result;
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) delta += (next[i] - v[i]) * (next[i] - v[i]);
    v = std::move(next);
    if (std::sqrt(delta) < tolerance) {
      result.converged = true;
      break;
    }
  }
  std::vector<double> mv = matvec(m, v);
  result.sigma = norm2(mv);
  if (result.sigma > 0.0) {
    for (double& x : mv) x /= result.sigma;
    result.left = std::move(mv);
  }
  result.right = std::move(v);
  return result;
}

double spectral_norm(const Matrix& m, std::size_t max_iterations, double tolerance) {
  if (m.empty()) return 0.0;
  std::vector<double> start(m.cols());
  for (std::size_t i = 0; i < start.size(); ++i)
    start[i] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  double best = power_iteration(m, start, max_iterations, tolerance).sigma;

  // The largest column norm is a lower bound on σ_max; falling short of it
  // means the start vector was (numerically) orthogonal to the top direction.
  std::size_t best_col = 0;
  double best_col_norm = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c) * m(r, c);
    if (s > best_col_norm) {
      best_col_norm = s;
      best_col = c;
    }
  }
  best_col_norm = std::sqrt(best_col_norm);
  if (best < best_col_norm * (1.0 - 1e-12)) {
    std::vector<double> e(m.cols(), 0.0);
    e[best_col] = 1.0;
    best = std::max(best, power_iteration(m, e, max_iterations, tolerance).sigma);
  }
  return best;
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

}  // namespace per
