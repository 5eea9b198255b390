#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace chnet {

using RealVector = std::vector<double>;
using Complex = std::complex<double>;

/// Dense row-major matrix of doubles. Row-major order is part of the
/// checkpoint contract, so do not change it.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  RealMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static RealMatrix identity(std::size_t n);
  /// Column vector (n x 1) view of a vector, copied.
  static RealMatrix column(std::span<const double> v);
  /// Row vector (1 x n), copied.
  static RealMatrix row_vector(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  const std::vector<double>& values() const noexcept { return data_; }

  RealMatrix transposed() const;
  bool all_finite() const noexcept;

  friend bool operator==(const RealMatrix&, const RealMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Complex matrix, used only at the boundary before real-valued lifting.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols, Complex fill = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Complex& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  Complex operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  ComplexMatrix adjoint() const;
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// [[Re, -Im], [Im, Re]] block lifting of an N_r x N_t complex matrix.
RealMatrix lift_complex(const ComplexMatrix& h);
/// Stacks [Re; Im].
RealVector lift_complex(std::span<const Complex> v);

// The kernels below are instrumented: they report m*n*k style counts to the
// active MultCounter, if any. Counting never changes results.

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
/// a * b^T without materializing the transpose.
RealMatrix matmul_transposed_b(const RealMatrix& a, const RealMatrix& b);
/// a^T * b without materializing the transpose.
RealMatrix matmul_transposed_a(const RealMatrix& a, const RealMatrix& b);
RealVector matvec(const RealMatrix& a, std::span<const double> x);
/// a^T x.
RealVector matvec_transposed(const RealMatrix& a, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double frobenius_squared(const RealMatrix& a);

/// Accumulating GEMM kernels on raw row-major storage: c += a * b and
/// c += a * b^T. Shapes: a is m x k; b is k x n (or n x k when transposed).
void gemm_acc(std::span<const double> a, std::span<const double> b,
              std::span<double> c, std::size_t m, std::size_t k, std::size_t n);
void gemm_bt_acc(std::span<const double> a, std::span<const double> b,
                 std::span<double> c, std::size_t m, std::size_t k,
                 std::size_t n);

/// Lower-triangular Cholesky factor L with A = L L^T. Throws NotSpdError.
RealMatrix cholesky(const RealMatrix& a);
/// Solves A X = B given the Cholesky factor of A.
RealMatrix cholesky_solve(const RealMatrix& l, const RealMatrix& b);
/// Solves A X = B for symmetric positive definite A.
RealMatrix solve_spd(const RealMatrix& a, const RealMatrix& b);
RealVector solve_spd(const RealMatrix& a, std::span<const double> b);

/// Unique symmetric PSD square root via eigendecomposition.
RealMatrix symmetric_sqrt(const RealMatrix& a);

}  // namespace chnet
