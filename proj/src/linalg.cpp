#include "mrv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mrv {

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Mat::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

bool Mat::all_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) fail(errc::dimension_mismatch, "matmul shape mismatch");
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> matvec(const Mat& a, std::span<const double> x) {
  if (a.cols() != static_cast<int>(x.size()))
    fail(errc::dimension_mismatch, "matvec shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

// ---------------------------------------------------------------------------
// SVD: one-sided Jacobi on columns.  High relative accuracy on the small
// singular values, which is what the rank detection rule feeds on.

namespace {

void orthonormal_fill(Mat& u, int col) {
  const int m = u.rows();
  const int k = u.cols();
  // Pick the unit vector with the largest residual after projecting out the
  // existing columns, then orthonormalize it.
  std::vector<double> best(m, 0.0);
  double best_norm = -1.0;
  for (int cand = 0; cand < m; ++cand) {
    std::vector<double> v(m, 0.0);
    v[cand] = 1.0;
    for (int j = 0; j < k; ++j) {
      if (j == col) continue;
      double dot = 0.0;
      for (int i = 0; i < m; ++i) dot += u(i, j) * v[i];
      for (int i = 0; i < m; ++i) v[i] -= dot * u(i, j);
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    if (nrm > best_norm) {
      best_norm = nrm;
      best = v;
    }
    if (best_norm > 0.5) break;
  }
  double nrm = std::sqrt(std::max(best_norm, 0.0));
  for (int i = 0; i < m; ++i) u(i, col) = nrm > 0 ? best[i] / nrm : 0.0;
}

SvdResult svd_tall(const Mat& a) {
  const int m = a.rows(), n = a.cols();
  Mat w = a;
  Mat v = Mat::identity(n);

  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int k = 0; k < m; ++k) {
          const double wi = w(k, i), wj = w(k, j);
          alpha += wi * wi;
          beta += wj * wj;
          gamma += wi * wj;
        }
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0 || std::abs(gamma) <= 1e-15 * scale) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int k = 0; k < m; ++k) {
          const double wi = w(k, i), wj = w(k, j);
          w(k, i) = c * wi - s * wj;
          w(k, j) = s * wi + c * wj;
        }
        for (int k = 0; k < n; ++k) {
          const double vi = v(k, i), vj = v(k, j);
          v(k, i) = c * vi - s * vj;
          v(k, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += w(k, j) * w(k, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.singular_values.resize(n);
  out.u = Mat(m, n);
  out.v = Mat(n, n);
  for (int jj = 0; jj < n; ++jj) {
    const int j = order[jj];
    out.singular_values[jj] = sigma[j];
    for (int k = 0; k < n; ++k) out.v(k, jj) = v(k, j);
    if (sigma[j] > 0.0) {
      for (int k = 0; k < m; ++k) out.u(k, jj) = w(k, j) / sigma[j];
    }
  }
  for (int jj = 0; jj < n; ++jj)
    if (out.singular_values[jj] == 0.0) orthonormal_fill(out.u, jj);
  return out;
}

}  // namespace

SvdResult svd(const Mat& a) {
  if (!a.all_finite()) fail(errc::non_finite, "svd: non-finite entries");
  if (a.rows() == 0 || a.cols() == 0) return {Mat(a.rows(), 0), {}, Mat(a.cols(), 0)};
  if (a.rows() >= a.cols()) return svd_tall(a);
  SvdResult t = svd_tall(transpose(a));
  return {std::move(t.v), std::move(t.singular_values), std::move(t.u)};
}

int numerical_rank(std::span<const double> sigma, double zero_tol, double gap, DecayRule rule) {
  if (zero_tol <= 0 || gap <= 0 || (rule == DecayRule::Ratio && gap >= 1))
    fail(errc::unsorted_input, "numerical_rank: bad tolerances");
  for (std::size_t k = 1; k < sigma.size(); ++k)
    if (sigma[k] > sigma[k - 1] * (1.0 + 1e-12) + 1e-300)
      fail(errc::unsorted_input, "numerical_rank: singular values not nonincreasing");
  int r = 0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    if (sigma[k] < zero_tol) break;
    if (k > 0) {
      const bool decayed = rule == DecayRule::Ratio ? sigma[k] / sigma[k - 1] <= gap
                                                    : sigma[k - 1] - sigma[k] >= gap;
      if (decayed) break;
    }
    ++r;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition: cyclic Jacobi.

SymEigResult eig_symmetric(const Mat& a) {
  const int n = a.rows();
  if (n != a.cols()) fail(errc::dimension_mismatch, "eig_symmetric: not square");
  const double scale = std::max(1.0, a.max_abs());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale)
        fail(errc::not_symmetric, "eig_symmetric: matrix not symmetric");

  Mat b = a;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) b(i, j) = b(j, i) = 0.5 * (a(i, j) + a(j, i));
  Mat q = Mat::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += b(i, j) * b(i, j);
    if (std::sqrt(off) <= 1e-15 * scale * n) break;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(b(i, j)) <= 1e-18 * scale) continue;
        const double theta = (b(j, j) - b(i, i)) / (2.0 * b(i, j));
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double bik = b(i, k), bjk = b(j, k);
          b(i, k) = c * bik - s * bjk;
          b(j, k) = s * bik + c * bjk;
        }
        for (int k = 0; k < n; ++k) {
          const double bki = b(k, i), bkj = b(k, j);
          b(k, i) = c * bki - s * bkj;
          b(k, j) = s * bki + c * bkj;
        }
        for (int k = 0; k < n; ++k) {
          const double qki = q(k, i), qkj = q(k, j);
          q(k, i) = c * qki - s * qkj;
          q(k, j) = s * qki + c * qkj;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return b(x, x) > b(y, y); });
  SymEigResult out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (int jj = 0; jj < n; ++jj) {
    out.values[jj] = b(order[jj], order[jj]);
    for (int k = 0; k < n; ++k) out.vectors(k, jj) = q(k, order[jj]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nonsymmetric eigensolver: complex Hessenberg + explicitly shifted QR for the
// values, inverse iteration for the vectors.

namespace {

using CMat = std::vector<cplx>;  // n x n row-major

inline cplx& at(CMat& h, int n, int i, int j) { return h[static_cast<std::size_t>(i) * n + j]; }
inline cplx cat(const CMat& h, int n, int i, int j) {
  return h[static_cast<std::size_t>(i) * n + j];
}

void hessenberg(CMat& h, int n) {
  for (int k = 0; k + 2 < n; ++k) {
    double colnorm = 0.0;
    for (int i = k + 1; i < n; ++i) colnorm += std::norm(cat(h, n, i, k));
    colnorm = std::sqrt(colnorm);
    if (colnorm == 0.0) continue;
    cplx x0 = cat(h, n, k + 1, k);
    cplx alpha = (std::abs(x0) == 0.0) ? cplx(-colnorm, 0.0) : -(x0 / std::abs(x0)) * colnorm;
    std::vector<cplx> v(n, cplx(0, 0));
    double vnorm = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[i] = cat(h, n, i, k) - (i == k + 1 ? alpha : cplx(0, 0));
      vnorm += std::norm(v[i]);
    }
    vnorm = std::sqrt(vnorm);
    if (vnorm < 1e-300) continue;
    for (int i = k + 1; i < n; ++i) v[i] /= vnorm;
    // H <- (I - 2vv*) H (I - 2vv*)
    for (int j = k; j < n; ++j) {
      cplx dot(0, 0);
      for (int i = k + 1; i < n; ++i) dot += std::conj(v[i]) * cat(h, n, i, j);
      for (int i = k + 1; i < n; ++i) at(h, n, i, j) -= 2.0 * v[i] * dot;
    }
    for (int i = 0; i < n; ++i) {
      cplx dot(0, 0);
      for (int j = k + 1; j < n; ++j) dot += cat(h, n, i, j) * v[j];
      for (int j = k + 1; j < n; ++j) at(h, n, i, j) -= 2.0 * dot * std::conj(v[j]);
    }
    for (int i = k + 2; i < n; ++i) at(h, n, i, k) = cplx(0, 0);
  }
}

// One explicitly shifted QR step on the active block [lo..hi] of Hessenberg h.
void qr_step(CMat& h, int n, int lo, int hi, cplx shift) {
  const int m = hi - lo + 1;
  if (m < 2) return;
  for (int i = lo; i <= hi; ++i) at(h, n, i, i) -= shift;
  // Givens elimination of the subdiagonal: store rotations.
  std::vector<cplx> gc(m - 1), gs(m - 1);
  for (int k = lo; k < hi; ++k) {
    cplx x = cat(h, n, k, k);
    cplx y = cat(h, n, k + 1, k);
    double nrm = std::sqrt(std::norm(x) + std::norm(y));
    cplx c, s;
    if (nrm == 0.0) {
      c = cplx(1, 0);
      s = cplx(0, 0);
    } else {
      c = std::conj(x) / nrm;
      s = std::conj(y) / nrm;
    }
    gc[k - lo] = c;
    gs[k - lo] = s;
    for (int j = k; j <= hi; ++j) {
      cplx hkj = cat(h, n, k, j), hk1j = cat(h, n, k + 1, j);
      at(h, n, k, j) = c * hkj + s * hk1j;
      at(h, n, k + 1, j) = -std::conj(s) * hkj + std::conj(c) * hk1j;
    }
  }
  // Multiply R by the accumulated rotations from the right: H = R G1* G2* ...
  for (int k = lo; k < hi; ++k) {
    cplx c = gc[k - lo], s = gs[k - lo];
    const int top = std::min(k + 2, hi);
    for (int i = lo; i <= top; ++i) {
      cplx hik = cat(h, n, i, k), hik1 = cat(h, n, i, k + 1);
      at(h, n, i, k) = hik * std::conj(c) + hik1 * std::conj(s);
      at(h, n, i, k + 1) = -hik * s + hik1 * c;
    }
  }
  for (int i = lo; i <= hi; ++i) at(h, n, i, i) += shift;
}

std::vector<cplx> hessenberg_eigenvalues(CMat h, int n, int iter_cap) {
  std::vector<cplx> values(n);
  int hi = n - 1;
  int total_iter = 0;
  int stuck = 0;
  while (hi >= 0) {
    if (hi == 0) {
      values[0] = cat(h, n, 0, 0);
      break;
    }
    // Deflation scan.
    int lo = hi;
    while (lo > 0) {
      const double sub = std::abs(cat(h, n, lo, lo - 1));
      const double diag =
          std::abs(cat(h, n, lo - 1, lo - 1)) + std::abs(cat(h, n, lo, lo));
      if (sub <= 1e-15 * diag + 1e-300) {
        at(h, n, lo, lo - 1) = cplx(0, 0);
        break;
      }
      --lo;
    }
    if (lo == hi) {
      values[hi] = cat(h, n, hi, hi);
      --hi;
      stuck = 0;
      continue;
    }
    // Wilkinson shift from the trailing 2x2 block.
    cplx a = cat(h, n, hi - 1, hi - 1), b = cat(h, n, hi - 1, hi);
    cplx c = cat(h, n, hi, hi - 1), d = cat(h, n, hi, hi);
    cplx tr = a + d;
    cplx disc = std::sqrt(tr * tr * 0.25 - (a * d - b * c));
    cplx mu1 = tr * 0.5 + disc, mu2 = tr * 0.5 - disc;
    cplx shift = (std::abs(mu1 - d) < std::abs(mu2 - d)) ? mu1 : mu2;
    ++stuck;
    if (stuck % 12 == 0) shift = d + std::abs(cat(h, n, hi, hi - 1)) * cplx(1.0, 0.5);
    qr_step(h, n, lo, hi, shift);
    if (++total_iter > iter_cap)
      fail(errc::no_convergence, "eig_nonsymmetric: QR iteration cap exceeded");
  }
  return values;
}

}  // namespace

EigResult eig_nonsymmetric(const Mat& a) {
  const int n = a.rows();
  if (n != a.cols()) fail(errc::dimension_mismatch, "eig_nonsymmetric: not square");
  if (!a.all_finite()) fail(errc::non_finite, "eig_nonsymmetric: non-finite entries");
  EigResult out;
  if (n == 0) return out;

  CMat h(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h[static_cast<std::size_t>(i) * n + j] = cplx(a(i, j), 0.0);
  hessenberg(h, n);
  std::vector<cplx> values = hessenberg_eigenvalues(std::move(h), n, 100 * std::max(n, 4));

  // Restore the conjugate symmetry the real input guarantees.
  const double scale = std::max(1.0, a.max_abs());
  const double pair_tol = 1e-8 * scale;
  for (auto& v : values)
    if (std::abs(v.imag()) <= pair_tol * 1e-2) v = cplx(v.real(), 0.0);
  std::vector<bool> used(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (used[i] || values[i].imag() == 0.0) continue;
    std::size_t best = values.size();
    double best_dist = pair_tol;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (j == i || used[j]) continue;
      const double dist = std::abs(values[j] - std::conj(values[i]));
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best < values.size()) {
      const cplx mean = 0.5 * (values[i] + std::conj(values[best]));
      values[i] = mean;
      values[best] = std::conj(mean);
      used[i] = used[best] = true;
    }
  }
  std::sort(values.begin(), values.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });

  // Inverse iteration per eigenvalue on the original matrix.
  out.values = values;
  out.vectors.resize(values.size());
  const double pivot_floor = 1e-14 * scale * n;
  CMat base(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) base[static_cast<std::size_t>(i) * n + j] = cplx(a(i, j), 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    CMat m = base;
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] -= values[k];
    std::vector<cplx> v(n);
    for (int i = 0; i < n; ++i)
      v[i] = cplx(1.0 + 0.013 * i + 0.007 * static_cast<double>(k), 0.021 * i);
    for (int it = 0; it < 3; ++it) {
      v = solve_complex(m, n, std::move(v), pivot_floor);
      double nrm = 0.0;
      for (const cplx& x : v) nrm += std::norm(x);
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) break;
      for (cplx& x : v) x /= nrm;
    }
    out.vectors[k] = std::move(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

bool Cholesky::factor(const Mat& a) {
  n_ = a.rows();
  l_ = Mat(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s)) return false;
        l_(i, i) = std::sqrt(s);
      } else {
        l_(i, j) = s / l_(j, j);
      }
    }
  }
  return true;
}

double Cholesky::log_det() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += std::log(l_(i, i));
  return 2.0 * s;
}

void Cholesky::solve_in_place(std::vector<double>& x) const {
  for (int i = 0; i < n_; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= l_(i, k) * x[k];
    x[i] = s / l_(i, i);
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n_; ++k) s -= l_(k, i) * x[k];
    x[i] = s / l_(i, i);
  }
}

Mat Cholesky::inverse_lower() const {
  Mat inv(n_, n_);
  for (int j = 0; j < n_; ++j) {
    inv(j, j) = 1.0 / l_(j, j);
    for (int i = j + 1; i < n_; ++i) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s += l_(i, k) * inv(k, j);
      inv(i, j) = -s / l_(i, i);
    }
  }
  return inv;
}

Mat Cholesky::inverse() const {
  Mat linv = inverse_lower();
  Mat inv(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = i; k < n_; ++k) s += linv(k, i) * linv(k, j);
      inv(i, j) = inv(j, i) = s;
    }
  return inv;
}

Mat Cholesky::whiten(const Mat& b) const {
  // X = L^{-1} B: forward substitution on each column.
  Mat x = b;
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      double s = x(i, j);
      for (int k = 0; k < i; ++k) s -= l_(i, k) * x(k, j);
      x(i, j) = s / l_(i, i);
    }
  }
  // W = X L^{-T}: forward substitution on each row.
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      double s = x(i, j);
      for (int k = 0; k < j; ++k) s -= x(i, k) * l_(j, k);
      x(i, j) = s / l_(j, j);
    }
  }
  return x;
}

std::vector<double> solve_spd(const Mat& a, std::span<const double> b) {
  const int n = a.rows();
  if (n != a.cols() || n != static_cast<int>(b.size()))
    fail(errc::dimension_mismatch, "solve_spd shape mismatch");
  const double scale = std::max(1.0, a.max_abs());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-8 * scale)
        fail(errc::not_symmetric, "solve_spd: matrix not symmetric");
  Cholesky chol;
  if (!chol.factor(a)) fail(errc::not_positive_definite, "solve_spd: Cholesky pivot <= 0");
  std::vector<double> x(b.begin(), b.end());
  chol.solve_in_place(x);
  return x;
}

// ---------------------------------------------------------------------------

QrPivot qr_col_pivot(const Mat& a) {
  const int m = a.rows(), n = a.cols();
  Mat r = a;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> colnorm(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += r(i, j) * r(i, j);
    colnorm[j] = s;
  }
  const int steps = std::min(m, n);
  std::vector<std::vector<double>> reflectors;
  reflectors.reserve(steps);

  for (int k = 0; k < steps; ++k) {
    int pivot = k;
    for (int j = k + 1; j < n; ++j)
      if (colnorm[j] > colnorm[pivot]) pivot = j;
    if (pivot != k) {
      for (int i = 0; i < m; ++i) std::swap(r(i, k), r(i, pivot));
      std::swap(colnorm[k], colnorm[pivot]);
      std::swap(perm[k], perm[pivot]);
    }
    double nrm = 0.0;
    for (int i = k; i < m; ++i) nrm += r(i, k) * r(i, k);
    nrm = std::sqrt(nrm);
    std::vector<double> v(m, 0.0);
    if (nrm > 0.0) {
      const double alpha = r(k, k) >= 0 ? -nrm : nrm;
      double vnorm = 0.0;
      for (int i = k; i < m; ++i) {
        v[i] = r(i, k) - (i == k ? alpha : 0.0);
        vnorm += v[i] * v[i];
      }
      vnorm = std::sqrt(vnorm);
      if (vnorm > 1e-300) {
        for (int i = k; i < m; ++i) v[i] /= vnorm;
        for (int j = k; j < n; ++j) {
          double dot = 0.0;
          for (int i = k; i < m; ++i) dot += v[i] * r(i, j);
          for (int i = k; i < m; ++i) r(i, j) -= 2.0 * v[i] * dot;
        }
      }
      r(k, k) = alpha;
      for (int i = k + 1; i < m; ++i) r(i, k) = 0.0;
    }
    reflectors.push_back(std::move(v));
    for (int j = k + 1; j < n; ++j) {
      colnorm[j] = 0.0;
      for (int i = k + 1; i < m; ++i) colnorm[j] += r(i, j) * r(i, j);
    }
  }

  Mat q = Mat::identity(m);
  for (int k = steps - 1; k >= 0; --k) {
    const std::vector<double>& v = reflectors[k];
    for (int j = 0; j < m; ++j) {
      double dot = 0.0;
      for (int i = k; i < m; ++i) dot += v[i] * q(i, j);
      if (dot == 0.0) continue;
      for (int i = k; i < m; ++i) q(i, j) -= 2.0 * v[i] * dot;
    }
  }
  return {std::move(q), std::move(r), std::move(perm)};
}

int QrPivot::rank(double rel_tol) const {
  const int steps = std::min(r.rows(), r.cols());
  if (steps == 0) return 0;
  const double top = std::abs(r(0, 0));
  if (top == 0.0) return 0;
  int rk = 0;
  for (int k = 0; k < steps; ++k) {
    if (std::abs(r(k, k)) <= rel_tol * top * std::max(r.rows(), r.cols())) break;
    ++rk;
  }
  return rk;
}

AffineSolution solve_affine(const Mat& e, std::span<const double> b, double rank_tol) {
  const int rows = e.rows(), nvar = e.cols();
  if (rows != static_cast<int>(b.size())) fail(errc::dimension_mismatch, "solve_affine shapes");
  QrPivot f = qr_col_pivot(transpose(e));  // E^T (nvar x rows) = Q R, row perm of E
  const int rk = f.rank(rank_tol);

  // E y = b  <=>  R^T (Q^T y) = P^T b; forward-substitute the leading block.
  std::vector<double> pb(rows);
  for (int j = 0; j < rows; ++j) pb[j] = b[f.perm[j]];
  std::vector<double> w(nvar, 0.0);
  for (int i = 0; i < rk; ++i) {
    double s = pb[i];
    for (int k = 0; k < i; ++k) s -= f.r(k, i) * w[k];
    w[i] = s / f.r(i, i);
  }
  AffineSolution out;
  out.rank = rk;
  out.particular.assign(nvar, 0.0);
  for (int i = 0; i < nvar; ++i) {
    double s = 0.0;
    for (int k = 0; k < rk; ++k) s += f.q(i, k) * w[k];
    out.particular[i] = s;
  }
  out.nullspace = Mat(nvar, nvar - rk);
  for (int i = 0; i < nvar; ++i)
    for (int j = rk; j < nvar; ++j) out.nullspace(i, j - rk) = f.q(i, j);

  std::vector<double> residual = matvec(e, out.particular);
  double res = 0.0;
  for (int i = 0; i < rows; ++i) {
    const double d = residual[i] - b[i];
    res += d * d;
  }
  out.residual = std::sqrt(res);
  return out;
}

std::vector<cplx> solve_complex(std::vector<cplx> a, int n, std::vector<cplx> b,
                                double pivot_floor) {
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  auto at2 = [&](int i, int j) -> cplx& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(at2(i, k)) > std::abs(at2(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(at2(k, j), at2(p, j));
      std::swap(b[k], b[p]);
    }
    if (std::abs(at2(k, k)) < pivot_floor)
      at2(k, k) = (std::abs(at2(k, k)) == 0.0)
                      ? cplx(pivot_floor, 0)
                      : at2(k, k) * (pivot_floor / std::abs(at2(k, k)));
    if (std::abs(at2(k, k)) == 0.0) at2(k, k) = cplx(1e-300, 0);
    for (int i = k + 1; i < n; ++i) {
      const cplx f = at2(i, k) / at2(k, k);
      if (f == cplx(0, 0)) continue;
      at2(i, k) = f;
      for (int j = k + 1; j < n; ++j) at2(i, j) -= f * at2(k, j);
      b[i] -= f * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    cplx s = b[i];
    for (int j = i + 1; j < n; ++j) s -= at2(i, j) * b[j];
    b[i] = s / at2(i, i);
  }
  return b;
}

}  // namespace mrv
