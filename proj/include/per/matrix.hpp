#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace per {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(double s, Matrix m);
Matrix transpose(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);

/// y = M x
std::vector<double> matvec(const Matrix& m, std::span<const double> x);
/// y = Mᵀ x
std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

struct PowerIterationResult {
  double sigma = 0.0;
  std::vector<double> right;  // unit right singular vector
  std::vector<double> left;   // unit left singular vector (empty when sigma == 0)
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration on MᵀM from the given start vector. Stops once the
/// iterate moves by less than `tolerance` (ℓ₂) or after `max_iterations`.
PowerIterationResult power_iteration(const Matrix& m, std::vector<double> start,
                                     std::size_t max_iterations, double tolerance);

/// Largest singular value.
double spectral_norm(const Matrix& m, std::size_t max_iterations = 10000,
                     double tolerance = 1e-10);

double frobenius_norm(const Matrix& m);

}  // namespace per
