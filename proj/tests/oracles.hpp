#pragma once

// Independent reference computations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "per/matrix.hpp"

namespace per::oracle {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(Matrix a, double tol = 1e-15, int sweeps = 100) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < tol * tol) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

inline Matrix gram(const Matrix& m) {
  Matrix g(m.cols(), m.cols());
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      g(i, j) = s;
    }
  return g;
}

/// Singular values, descending, from the Gram matrix eigenvalues.
inline std::vector<double> singular_values(const Matrix& m) {
  auto ev = jacobi_eigenvalues(gram(m));
  for (double& v : ev) v = std::sqrt(std::max(v, 0.0));
  return ev;
}

/// Ψ(x) from the Taylor series Ψ(x) = 1/2 + φ(x)·Σ x^{2k+1}/(2k+1)!! in long double.
inline long double normal_cdf_series(long double x) {
  const long double pi = 3.141592653589793238462643383279502884L;
  long double term = x;
  long double sum = x;
  for (int k = 1; k < 2000; ++k) {
    term *= x * x / (2.0L * k + 1.0L);
    sum += term;
    if (std::abs(term) < 1e-30L * std::abs(sum)) break;
  }
  return 0.5L + std::exp(-0.5L * x * x) / std::sqrt(2.0L * pi) * sum;
}

/// Ψ⁻¹(p) by bisection on the series CDF; for p > 1/2 uses symmetry on the
/// accurately represented lower tail.
inline double inverse_normal_cdf_bisect(double p) {
  const bool upper = p > 0.5;
  const long double target = upper ? 1.0L - static_cast<long double>(p) : p;
  long double lo = -12.0L;
  long double hi = 0.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (normal_cdf_series(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double x = static_cast<double>(0.5L * (lo + hi));
  return upper ? -x : x;
}

/// P(X ≥ k) for X ~ Binomial(n, p), by direct summation in long double.
inline long double binomial_upper_tail(std::size_t k, std::size_t n, long double p) {
  if (k == 0) return 1.0L;
  if (p <= 0.0L) return 0.0L;
  if (p >= 1.0L) return 1.0L;
  long double sum = 0.0L;
  const long double lp = std::log(p);
  const long double lq = std::log1p(-p);
  for (std::size_t i = k; i <= n; ++i) {
    const long double lc = std::lgamma(static_cast<long double>(n) + 1) -
                           std::lgamma(static_cast<long double>(i) + 1) -
                           std::lgamma(static_cast<long double>(n - i) + 1);
    sum += std::exp(lc + i * lp + (n - i) * lq);
  }
  return sum;
}

/// Lower Clopper-Pearson bound by bisection on the summed binomial tail.
inline double clopper_pearson_lower_tail(std::size_t k, std::size_t n, double alpha) {
  if (k == 0) return 0.0;
  long double lo = 0.0L;
  long double hi = 1.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (binomial_upper_tail(k, n, mid) < alpha)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<double>(lo);
}

/// Central finite difference of f along parameter i.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Random off-diagonal nonnegative matrix with zero diagonal.
template <class Uniform>
Matrix random_zero_diagonal(std::size_t d, Uniform&& u01) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j) m(i, j) = u01();
  return m;
}

}  // namespace per::oracle
