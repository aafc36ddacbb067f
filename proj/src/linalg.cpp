#include "metamarket/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <limits>
#include <string>
#include <utility>

#include "metamarket/errors.hpp"

namespace metamarket::linalg {

BandMatrix::BandMatrix(std::size_t n, std::size_t width)
    : n_(n), width_(width), data_(n * (2 * width + 1), 0.0) {}

double& BandMatrix::at(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_ || (i > j ? i - j : j - i) > width_) throw std::out_of_range("BandMatrix: outside band");
  return data_[index(i, j)];
}

double BandMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw std::out_of_range("BandMatrix: index");
  if ((i > j ? i - j : j - i) > width_) return 0.0;
  return data_[index(i, j)];
}

std::vector<double> BandMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > width_ ? i - width_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + width_);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += data_[index(i, j)] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> BandMatrix::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("BandMatrix::solve: size mismatch");
  std::vector<double> a = data_;
  std::vector<double> b(rhs.begin(), rhs.end());
  auto idx = [&](std::size_t i, std::size_t j) { return index(i, j); };

  for (std::size_t k = 0; k < n_; ++k) {
    const double pivot = a[idx(k, k)];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw NumericalError("band solve: zero pivot at row " + std::to_string(k),
                           std::numeric_limits<double>::infinity());
    }
    const std::size_t hi = std::min(n_ - 1, k + width_);
    for (std::size_t i = k + 1; i <= hi; ++i) {
      const double factor = a[idx(i, k)] / pivot;
      if (factor == 0.0) continue;
      for (std::size_t j = k; j <= hi; ++j) a[idx(i, j)] -= factor * a[idx(k, j)];
      b[i] -= factor * b[k];
    }
  }
  std::vector<double> x(n_, 0.0);
  for (std::size_t k = n_; k-- > 0;) {
    const std::size_t hi = std::min(n_ - 1, k + width_);
    double s = b[k];
    for (std::size_t j = k + 1; j <= hi; ++j) s -= a[idx(k, j)] * x[j];
    x[k] = s / a[idx(k, k)];
  }
  return x;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += data_[i * n_ + j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> DenseMatrix::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("DenseMatrix::solve: size mismatch");
  std::vector<double> a = data_;
  std::vector<double> b(rhs.begin(), rhs.end());
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n_; ++i) {
      if (std::abs(a[i * n_ + k]) > std::abs(a[p * n_ + k])) p = i;
    }
    if (a[p * n_ + k] == 0.0) throw NumericalError("dense solve: singular matrix", std::numeric_limits<double>::infinity());
    if (p != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(a[k * n_ + j], a[p * n_ + j]);
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double factor = a[i * n_ + k] / a[k * n_ + k];
      if (factor == 0.0) continue;
      for (std::size_t j = k; j < n_; ++j) a[i * n_ + j] -= factor * a[k * n_ + j];
      b[i] -= factor * b[k];
    }
  }
  std::vector<double> x(n_, 0.0);
  for (std::size_t k = n_; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n_; ++j) s -= a[k * n_ + j] * x[j];
    x[k] = s / a[k * n_ + k];
  }
  return x;
}

double max_abs(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace metamarket::linalg
