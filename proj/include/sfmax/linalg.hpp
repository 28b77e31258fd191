#pragma once

// Dense Hermitian linear algebra sized for this problem (matrices up to a few
// hundred rows): complex Cholesky, a cyclic Jacobi eigensolver, the largest
// generalized eigenvalue of a definite pencil, and a log-scaled determinant
// for the small but wildly-scaled matrices the distribution formulas produce.

#include <complex>
#include <vector>

#include "sfmax/log_scaled.hpp"

namespace sfmax::linalg {

using cplx = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(long rows, long cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols)) {}

  long rows() const { return rows_; }
  long cols() const { return cols_; }
  cplx& operator()(long i, long j) { return data_[static_cast<size_t>(i * cols_ + j)]; }
  const cplx& operator()(long i, long j) const {
    return data_[static_cast<size_t>(i * cols_ + j)];
  }

 private:
  long rows_ = 0;
  long cols_ = 0;
  std::vector<cplx> data_;
};

// Square real matrix, row-major.
class RealMatrix {
 public:
  RealMatrix() = default;
  explicit RealMatrix(long n) : n_(n), data_(static_cast<size_t>(n * n), 0.0) {}

  long size() const { return n_; }
  double& operator()(long i, long j) { return data_[static_cast<size_t>(i * n_ + j)]; }
  const double& operator()(long i, long j) const {
    return data_[static_cast<size_t>(i * n_ + j)];
  }

 private:
  long n_ = 0;
  std::vector<double> data_;
};

// Square matrix of sign+log entries; used for determinants whose entries span
// thousands of orders of magnitude.
class LogScaledMatrix {
 public:
  LogScaledMatrix() = default;
  explicit LogScaledMatrix(long n)
      : n_(n), data_(static_cast<size_t>(n * n), LogScaled::zero()) {}

  long size() const { return n_; }
  LogScaled& operator()(long i, long j) { return data_[static_cast<size_t>(i * n_ + j)]; }
  const LogScaled& operator()(long i, long j) const {
    return data_[static_cast<size_t>(i * n_ + j)];
  }

 private:
  long n_ = 0;
  std::vector<LogScaled> data_;
};

// Lower-triangular L with A = L L^H. Requires A Hermitian positive definite;
// throws numerical_instability_error when a pivot is not strictly positive.
ComplexMatrix cholesky_hermitian(const ComplexMatrix& a);

// All eigenvalues of a Hermitian matrix, ascending. Cyclic Jacobi sweeps until
// the off-diagonal Frobenius mass is below 1e-14 * ||A||_F (at most 50 sweeps).
std::vector<double> eigvals_hermitian(ComplexMatrix a);

// Largest lambda with A x = lambda B x, for A Hermitian PSD and B Hermitian
// positive definite: reduce to the ordinary problem L^{-1} A L^{-H} with
// B = L L^H. The product is symmetrized before the eigensolve.
double max_generalized_eig(const ComplexMatrix& a, const ComplexMatrix& b);

// Sign and log-magnitude of det(a) via LU with partial pivoting. Singular
// input yields sign 0, never an error.
LogScaled logdet_lu(const RealMatrix& a);

// As above for a log-scaled matrix: each column is pre-scaled by its largest
// magnitude (multiplied back at the end) so the double-precision elimination
// works on O(1) entries. If cancellation_digits is non-null it receives an
// estimate of the decimal digits lost to cancellation during elimination.
LogScaled logdet_lu(const LogScaledMatrix& a, double* cancellation_digits = nullptr);

}  // namespace sfmax::linalg
