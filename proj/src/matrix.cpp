#include "chnet/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "chnet/errors.hpp"
#include "chnet/mult_counter.hpp"

namespace chnet {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

}  // namespace

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, "RealMatrix: data length != rows*cols");
}

RealMatrix::RealMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "RealMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

RealMatrix RealMatrix::identity(std::size_t n) {
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

RealMatrix RealMatrix::column(std::span<const double> v) {
  return RealMatrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

RealMatrix RealMatrix::row_vector(std::span<const double> v) {
  return RealMatrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

RealMatrix RealMatrix::transposed() const {
  RealMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool RealMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, Complex fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
  return t;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), "complex matmul: inner dimension mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

RealMatrix lift_complex(const ComplexMatrix& h) {
  const std::size_t nr = h.rows(), nt = h.cols();
  RealMatrix out(2 * nr, 2 * nt);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const Complex v = h(i, j);
      out(i, j) = v.real();
      out(i, j + nt) = -v.imag();
      out(i + nr, j) = v.imag();
      out(i + nr, j + nt) = v.real();
    }
  return out;
}

RealVector lift_complex(std::span<const Complex> v) {
  RealVector out(2 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i].real();
    out[i + v.size()] = v[i].imag();
  }
  return out;
}

namespace {

using Lane4 = double __attribute__((vector_size(32)));

inline Lane4 load4(const double* p) {
  Lane4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store4(double* p, Lane4 v) { std::memcpy(p, &v, sizeof v); }

// c[i0:i0+MR, j0:j0+8] += a[i0:i0+MR, :] b[:, j0:j0+8], accumulators held in
// registers. Each c entry still sums over p in ascending order, so results
// match the plain triple loop bit for bit.
template <std::size_t MR>
void gemm_tile(const double* pa, const double* pb, double* pc, std::size_t k,
               std::size_t n, std::size_t i0, std::size_t j0) {
  Lane4 lo[MR], hi[MR];
  for (std::size_t r = 0; r < MR; ++r) {
    lo[r] = load4(pc + (i0 + r) * n + j0);
    hi[r] = load4(pc + (i0 + r) * n + j0 + 4);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const Lane4 b0 = load4(pb + p * n + j0);
    const Lane4 b1 = load4(pb + p * n + j0 + 4);
    for (std::size_t r = 0; r < MR; ++r) {
      const double a_rp = pa[(i0 + r) * k + p];
      lo[r] += a_rp * b0;
      hi[r] += a_rp * b1;
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    store4(pc + (i0 + r) * n + j0, lo[r]);
    store4(pc + (i0 + r) * n + j0 + 4, hi[r]);
  }
}

}  // namespace

void gemm_acc(std::span<const double> a, std::span<const double> b,
              std::span<double> c, std::size_t m, std::size_t k,
              std::size_t n) {
  count_mults(static_cast<std::uint64_t>(m) * k * n);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  const std::size_t n_main = n - n % 8;
  for (std::size_t j = 0; j < n_main; j += 8) {
    std::size_t i = 0;
    for (; i + 6 <= m; i += 6) gemm_tile<6>(pa, pb, pc, k, n, i, j);
    for (; i + 2 <= m; i += 2) gemm_tile<2>(pa, pb, pc, k, n, i, j);
    for (; i < m; ++i) gemm_tile<1>(pa, pb, pc, k, n, i, j);
  }
  if (n_main == n) return;
  for (std::size_t i = 0; i < m; ++i) {
    double* __restrict ci = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* __restrict bp = pb + p * n;
      for (std::size_t j = n_main; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_bt_acc(std::span<const double> a, std::span<const double> b,
                 std::span<double> c, std::size_t m, std::size_t k,
                 std::size_t n) {
  count_mults(static_cast<std::uint64_t>(m) * k * n);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* __restrict ai = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* __restrict bj = pb + j * k;
      double s = 0.0;
#pragma omp simd reduction(+ : s)
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      pc[i * n + j] += s;
    }
  }
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  RealMatrix c(a.rows(), b.cols());
  gemm_acc(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

RealMatrix matmul_transposed_b(const RealMatrix& a, const RealMatrix& b) {
  require(a.cols() == b.cols(), "matmul_transposed_b: inner dimension mismatch");
  RealMatrix c(a.rows(), b.rows());
  gemm_bt_acc(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

RealMatrix matmul_transposed_a(const RealMatrix& a, const RealMatrix& b) {
  require(a.rows() == b.rows(), "matmul_transposed_a: inner dimension mismatch");
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  count_mults(static_cast<std::uint64_t>(m) * k * n);
  RealMatrix c(m, n);
  for (std::size_t p = 0; p < k; ++p) {
    const auto ap = a.row(p);
    const auto bp = b.row(p);
    for (std::size_t i = 0; i < m; ++i) {
      const double v = ap[i];
      auto ci = c.row(i);
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bp[j];
    }
  }
  return c;
}

RealVector matvec(const RealMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  count_mults(static_cast<std::uint64_t>(a.rows()) * a.cols());
  RealVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

RealVector matvec_transposed(const RealMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matvec_transposed: dimension mismatch");
  count_mults(static_cast<std::uint64_t>(a.rows()) * a.cols());
  RealVector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += ai[j] * xi;
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  count_mults(a.size());
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double frobenius_squared(const RealMatrix& a) { return squared_norm(a.data()); }

RealMatrix cholesky(const RealMatrix& a) {
  require(a.rows() == a.cols(), "cholesky: matrix not square");
  const std::size_t n = a.rows();
  RealMatrix l(n, n);
  std::uint64_t mults = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    mults += j;
    if (!(d > 0.0) || !std::isfinite(d)) {
      count_mults(mults);
      throw NotSpdError();
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const double inv = 1.0 / ljj;
    mults += 1;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s * inv;
      mults += j + 1;
    }
  }
  count_mults(mults);
  return l;
}

RealMatrix cholesky_solve(const RealMatrix& l, const RealMatrix& b) {
  require(l.rows() == b.rows(), "cholesky_solve: dimension mismatch");
  const std::size_t n = l.rows(), m = b.cols();
  RealMatrix x = b;
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / l(i, i);
  std::uint64_t mults = n;
  // forward: L z = b
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s * inv_diag[i];
    }
    // backward: L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, c);
      x(ii, c) = s * inv_diag[ii];
    }
  }
  mults += static_cast<std::uint64_t>(m) * n * (n + 1);
  count_mults(mults);
  return x;
}

RealMatrix solve_spd(const RealMatrix& a, const RealMatrix& b) {
  require(a.rows() == b.rows(), "solve_spd: dimension mismatch");
  return cholesky_solve(cholesky(a), b);
}

RealVector solve_spd(const RealMatrix& a, std::span<const double> b) {
  return solve_spd(a, RealMatrix::column(b)).values();
}

RealMatrix symmetric_sqrt(const RealMatrix& a) {
  require(a.rows() == a.cols(), "symmetric_sqrt: matrix not square");
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success)
    throw NumericError("symmetric_sqrt: eigendecomposition failed");
  const auto& lambda = eig.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.minCoeff() < -tol)
    throw NumericError("symmetric_sqrt: matrix is not positive semidefinite");
  const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd s =
      eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  RealMatrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      // symmetrize away the last-ulp asymmetry of the product
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          0.5 * (s(i, j) + s(j, i));
  return out;
}

}  // namespace chnet
