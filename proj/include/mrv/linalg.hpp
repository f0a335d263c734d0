#pragma once

// Dense real linear algebra: SVD, symmetric and nonsymmetric eigensolvers,
// Cholesky/QR factorizations, and the numerical-rank rule used throughout the
// moment-matrix pipeline.  Direct O(n^3) methods; sizes in scope stay small.

#include <complex>
#include <span>
#include <vector>

#include "mrv/errors.hpp"

namespace mrv {

class Mat {
public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}
  static Mat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  double* row(int i) { return a_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * cols_; }

  double max_abs() const;
  bool all_finite() const;

private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
std::vector<double> matvec(const Mat& a, std::span<const double> x);

// A = U * diag(sigma) * V^T with U: rows x k, V: cols x k, k = min(rows, cols);
// sigma nonincreasing, U and V have orthonormal columns.
struct SvdResult {
  Mat u;
  std::vector<double> singular_values;
  Mat v;
};

SvdResult svd(const Mat& a);

// Reading of the "decay between two subsequent values" cut: consecutive
// quotient (default) or absolute difference.
enum class DecayRule { Ratio, Difference };

// Number of leading singular values kept: cut at the first k with
// sigma[k] < zero_tol or, under the ratio rule, sigma[k]/sigma[k-1] <= gap
// (under the difference rule, sigma[k-1] - sigma[k] >= gap).
int numerical_rank(std::span<const double> sigma, double zero_tol = 1e-8, double gap = 1e-3,
                   DecayRule rule = DecayRule::Ratio);

// A = Q * diag(values) * Q^T for symmetric A; values sorted nonincreasing.
struct SymEigResult {
  std::vector<double> values;
  Mat vectors;  // columns are eigenvectors
};

SymEigResult eig_symmetric(const Mat& a);

using cplx = std::complex<double>;

struct EigResult {
  std::vector<cplx> values;
  std::vector<std::vector<cplx>> vectors;  // right eigenvectors, unit 2-norm
};

// Full spectrum of a square real matrix via Hessenberg reduction plus shifted
// QR, eigenvectors by inverse iteration.  Conjugate symmetry of the spectrum
// is restored after the iteration.
EigResult eig_nonsymmetric(const Mat& a);

std::vector<double> solve_spd(const Mat& a, std::span<const double> b);

// Lower-triangular Cholesky factor kept explicitly; used heavily by the SDP
// barrier, so failure is a cheap boolean rather than an exception.
class Cholesky {
public:
  bool factor(const Mat& a);  // false if a pivot is not strictly positive
  int dim() const { return n_; }
  const Mat& lower() const { return l_; }
  double log_det() const;                                  // log det A
  void solve_in_place(std::vector<double>& x) const;       // A x = b
  Mat inverse() const;                                     // A^{-1}
  Mat inverse_lower() const;                               // L^{-1}
  // X = L^{-1} B L^{-T} for symmetric B (congruence into the whitened frame).
  Mat whiten(const Mat& b) const;

private:
  int n_ = 0;
  Mat l_;
};

// Householder QR with column pivoting: A(:, perm[j]) = (Q R)(:, j).
struct QrPivot {
  Mat q;                  // m x m orthogonal
  Mat r;                  // m x n upper trapezoidal
  std::vector<int> perm;  // size n
  int rank(double rel_tol = 1e-11) const;
};

QrPivot qr_col_pivot(const Mat& a);

// Minimum-norm solution of E y = b together with an orthonormal basis of
// Ker E; residual reports inconsistency of the system.
struct AffineSolution {
  std::vector<double> particular;
  Mat nullspace;  // N x p, orthonormal columns
  double residual = 0.0;
  int rank = 0;
};

AffineSolution solve_affine(const Mat& e, std::span<const double> b, double rank_tol = 1e-11);

// Linear solve with a complex square matrix (partial pivoting); near-zero
// pivots are floored so inverse iteration can run on shifted singular systems.
std::vector<cplx> solve_complex(std::vector<cplx> a, int n, std::vector<cplx> b,
                                double pivot_floor = 0.0);

}  // namespace mrv
