#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace metamarket::linalg {

/// Square band matrix stored by diagonals: entry (i, j) with |i - j| <= width.
class BandMatrix {
 public:
  BandMatrix(std::size_t n, std::size_t width);

  std::size_t size() const noexcept { return n_; }
  std::size_t width() const noexcept { return width_; }

  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  /// y = A x
  std::vector<double> multiply(std::span<const double> x) const;

  /// Gaussian elimination without pivoting. Valid for row or column
  /// diagonally dominant matrices (M-matrices from resolvents and Dirichlet
  /// problems). Throws NumericalError on a vanishing pivot.
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const { return i * (2 * width_ + 1) + (j + width_ - i); }

  std::size_t n_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Row-major dense matrix with partial-pivoting LU; the reference solver.
class DenseMatrix {
 public:
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

double max_abs(std::span<const double> v) noexcept;

}  // namespace metamarket::linalg
