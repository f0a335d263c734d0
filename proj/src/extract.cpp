#include "mrv/extract.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mrv {

const char* to_string(FlatCondition c) {
  switch (c) {
    case FlatCondition::FlatD: return "flat-d";
    case FlatCondition::FlatOneHighOrder: return "flat-one-high";
    case FlatCondition::FlatOnePartial: return "flat-one-partial";
    case FlatCondition::PrebasisOnly: return "prebasis-only";
    case FlatCondition::None: return "none";
  }
  return "none";
}

std::vector<int> nested_ranks(const Mat& m, const std::vector<int>& block_dims,
                              const RankTolerances& tol,
                              std::vector<std::vector<double>>* sigmas) {
  std::vector<int> ranks;
  for (int dim : block_dims) {
    Mat sub(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) sub(i, j) = m(i, j);
    SvdResult dec = svd(sub);
    ranks.push_back(numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio));
    if (sigmas) sigmas->push_back(std::move(dec.singular_values));
  }
  return ranks;
}

RankReport rank_sequence(const MomentSequence& y, int t, const RankTolerances& tol) {
  const Mat m = assemble_moment_matrix(y, t);
  std::vector<int> dims;
  for (int s = 0; s <= t; ++s) dims.push_back(binomial(y.n + s, y.n));
  RankReport report;
  report.ranks = nested_ranks(m, dims, tol, &report.singular_values);
  const int d = 1;  // caller re-certifies with the true d; default keeps fields coherent
  std::tie(report.s, report.condition) = certify_condition(report.ranks, d, t);
  return report;
}

std::pair<int, FlatCondition> certify_condition(const std::vector<int>& ranks, int d, int t) {
  for (int s = d; s <= t; ++s)
    if (ranks[s] == ranks[s - d]) return {s, FlatCondition::FlatD};
  for (int s = std::max(2 * d, 1); s <= t; ++s)
    if (ranks[s] == ranks[s - 1]) return {s, FlatCondition::FlatOneHighOrder};
  for (int s = 1; s <= t; ++s)
    if (ranks[s] == ranks[s - 1]) return {s, FlatCondition::FlatOnePartial};
  return {t, FlatCondition::PrebasisOnly};
}

QuotientBasis svd_basis(const Mat& m_prev, int n, int degree, const RankTolerances& tol) {
  SvdResult dec = svd(m_prev);
  const int r = numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio);
  QuotientBasis basis;
  basis.kind = BasisKind::SvdPolynomial;
  basis.r = r;
  basis.n = n;
  basis.max_degree = degree;
  basis.coefficients = Mat(m_prev.rows(), r);
  for (int i = 0; i < m_prev.rows(); ++i)
    for (int k = 0; k < r; ++k) basis.coefficients(i, k) = dec.u(i, k);
  return basis;
}

namespace {

bool columns_independent(const Mat& m, const std::vector<int>& cols, const RankTolerances& tol) {
  Mat sub(m.rows(), static_cast<int>(cols.size()));
  for (int i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) sub(i, static_cast<int>(j)) = m(i, cols[j]);
  const SvdResult dec = svd(sub);
  return numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio) ==
         static_cast<int>(cols.size());
}

void finish_monomial_basis(QuotientBasis& basis) {
  const int n = basis.n;
  std::set<Exponent> members(basis.monomials.begin(), basis.monomials.end());
  basis.order_ideal = true;
  for (const Exponent& b : basis.monomials) {
    for (int i = 0; i < n && basis.order_ideal; ++i) {
      if (b.e[i] == 0) continue;
      Exponent div = b;
      div.e[i] -= 1;
      if (!members.count(div)) basis.order_ideal = false;
    }
  }
  std::set<Exponent> border;
  for (const Exponent& b : basis.monomials)
    for (int i = 0; i < n; ++i) {
      Exponent up = b;
      up.e[i] += 1;
      if (!members.count(up)) border.insert(up);
    }
  // Border listed in the canonical enumeration order.
  std::vector<Exponent> sorted(border.begin(), border.end());
  MonomialOrder order;
  std::sort(sorted.begin(), sorted.end(), [&](const Exponent& a, const Exponent& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return order.compare(a, b) > 0;
  });
  basis.border = std::move(sorted);
}

}  // namespace

QuotientBasis greedy_monomial_basis(const Mat& m_prev, int n, int degree,
                                    const RankTolerances& tol) {
  const SvdResult dec = svd(m_prev);
  const int r = numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio);
  MomentIndexMap idx(n, degree);

  QuotientBasis basis;
  basis.kind = BasisKind::GreedyMonomial;
  basis.r = r;
  basis.n = n;
  basis.max_degree = degree;

  std::vector<int> chosen;
  for (int j = 0; j < idx.size() && static_cast<int>(chosen.size()) < r; ++j) {
    std::vector<int> trial = chosen;
    trial.push_back(j);
    if (columns_independent(m_prev, trial, tol)) chosen = std::move(trial);
  }
  if (static_cast<int>(chosen.size()) < r)
    fail(errc::basis_incomplete, "greedy_monomial_basis: fewer independent monomials than rank");
  for (int j : chosen) basis.monomials.push_back(idx.monomial(j));
  finish_monomial_basis(basis);
  return basis;
}

std::vector<Exponent> greedy_sieve(
    const std::function<bool(const std::vector<Exponent>&)>& independent,
    const MonomialOrder& order, int n, int s) {
  std::vector<Exponent> universe = enumerate_monomials(n, s);
  std::sort(universe.begin(), universe.end(),
            [&](const Exponent& a, const Exponent& b) { return order.compare(a, b) < 0; });
  std::vector<Exponent> kept;  // accepted monomials, scan order
  std::vector<Exponent> rejected;
  for (const Exponent& t : universe) {
    bool multiple_of_rejected = false;
    for (const Exponent& rej : rejected)
      if (divides(rej, t)) {
        multiple_of_rejected = true;
        break;
      }
    if (multiple_of_rejected) continue;
    std::vector<Exponent> trial = kept;
    trial.push_back(t);
    if (independent(trial))
      kept.push_back(t);
    else
      rejected.push_back(t);
  }
  return kept;
}

QuotientBasis basis_from_monomials(std::vector<Exponent> monomials, int n, int degree,
                                   BasisKind kind) {
  QuotientBasis basis;
  basis.kind = kind;
  basis.r = static_cast<int>(monomials.size());
  basis.n = n;
  basis.max_degree = degree;
  basis.monomials = std::move(monomials);
  finish_monomial_basis(basis);
  return basis;
}

namespace {

// Least-squares solve via SVD pseudoinverse; throws when rank-deficient.
struct PinvSolver {
  SvdResult dec;
  int rank = 0;

  PinvSolver(const Mat& a, const RankTolerances& tol, errc deficiency_error) : dec(svd(a)) {
    rank = numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio);
    if (rank < std::min(a.rows(), a.cols()))
      fail(deficiency_error, "basis block is numerically singular");
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> ut(rank, 0.0);
    for (int k = 0; k < rank; ++k) {
      double dot = 0.0;
      for (int i = 0; i < dec.u.rows(); ++i) dot += dec.u(i, k) * b[i];
      ut[k] = dot / dec.singular_values[k];
    }
    std::vector<double> x(dec.v.rows(), 0.0);
    for (int j = 0; j < dec.v.rows(); ++j) {
      double dot = 0.0;
      for (int k = 0; k < rank; ++k) dot += dec.v(j, k) * ut[k];
      x[j] = dot;
    }
    return x;
  }
};

double commutativity_error(const std::vector<Mat>& xs) {
  double err = 0.0;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Mat ab = matmul(xs[i], xs[j]);
      const Mat ba = matmul(xs[j], xs[i]);
      for (int r = 0; r < ab.rows(); ++r)
        for (int c = 0; c < ab.cols(); ++c) err = std::max(err, std::abs(ab(r, c) - ba(r, c)));
    }
  return err;
}

}  // namespace

MultiplicationSystem multiplication_matrices(const Mat& m_s, int n, int s,
                                             const QuotientBasis& basis,
                                             const RankTolerances& tol) {
  MomentIndexMap idx(n, s);
  if (m_s.rows() != idx.size())
    fail(errc::dimension_mismatch, "multiplication_matrices: matrix does not match T_{n,s}");
  const int r = basis.r;
  MultiplicationSystem ms;
  ms.basis = basis;
  ms.matrices.assign(n, Mat(r, r));

  if (basis.kind == BasisKind::SvdPolynomial) {
    const int dim_prev = idx.size_at(basis.max_degree);
    const Mat& u = basis.coefficients;
    // M_B = U^T M_{s-1} U and P_i = U^T Ptilde_i U with Ptilde_i the
    // (T_{n,s-1}) x (x_i T_{n,s-1}) slice of M_s.
    Mat mb(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        double sum = 0.0;
        for (int i = 0; i < dim_prev; ++i)
          for (int j = 0; j < dim_prev; ++j) sum += u(i, a) * m_s(i, j) * u(j, b);
        mb(a, b) = sum;
      }
    PinvSolver solver(mb, tol, errc::singular_basis_block);
    for (int v = 0; v < n; ++v) {
      Mat pt(dim_prev, dim_prev);
      for (int j = 0; j < dim_prev; ++j) {
        Exponent shifted = idx.monomial(j);
        shifted.e[v] += 1;
        const int col = idx.index(shifted);
        for (int i = 0; i < dim_prev; ++i) pt(i, j) = m_s(i, col);
      }
      Mat pv(r, r);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          double sum = 0.0;
          for (int i = 0; i < dim_prev; ++i)
            for (int j = 0; j < dim_prev; ++j) sum += u(i, a) * pt(i, j) * u(j, b);
          pv(a, b) = sum;
        }
      for (int col = 0; col < r; ++col) {
        std::vector<double> rhs(r);
        for (int row = 0; row < r; ++row) rhs[row] = pv(row, col);
        const std::vector<double> sol = solver.solve(rhs);
        for (int row = 0; row < r; ++row) ms.matrices[v](row, col) = sol[row];
      }
    }
  } else {
    std::vector<int> bpos;
    for (const Exponent& b : basis.monomials) bpos.push_back(idx.index(b));
    Mat mb(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) mb(a, b) = m_s(bpos[a], bpos[b]);
    PinvSolver solver(mb, tol, errc::singular_basis_block);
    for (int v = 0; v < n; ++v) {
      for (int j = 0; j < r; ++j) {
        Exponent target = basis.monomials[j];
        target.e[v] += 1;
        const int col = idx.index(target);
        std::vector<double> rhs(r);
        for (int row = 0; row < r; ++row) rhs[row] = m_s(bpos[row], col);
        const std::vector<double> sol = solver.solve(rhs);
        for (int row = 0; row < r; ++row) ms.matrices[v](row, j) = sol[row];
      }
    }
  }
  ms.commutativity_error = commutativity_error(ms.matrices);
  return ms;
}

bool prebasis_rank_ok(const Mat& m_s, int n, int s, const QuotientBasis& basis,
                      const RankTolerances& tol) {
  MomentIndexMap idx(n, s);
  std::vector<int> pos;
  for (const Exponent& b : basis.monomials) pos.push_back(idx.index(b));
  for (const Exponent& c : basis.border) {
    if (c.degree() > s) return false;
    pos.push_back(idx.index(c));
  }
  Mat sub(static_cast<int>(pos.size()), static_cast<int>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = 0; j < pos.size(); ++j)
      sub(static_cast<int>(i), static_cast<int>(j)) = m_s(pos[i], pos[j]);
  const SvdResult dec = svd(sub);
  return numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio) == basis.r;
}

namespace {

// Deterministic unit direction from a 64-bit seeded generator.
std::vector<double> random_unit(int n, std::uint64_t& state) {
  auto next_uniform = [&state]() {
    // xorshift64*: reproducible across platforms.
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    const std::uint64_t z = state * 0x2545F4914F6CDD1DULL;
    return (static_cast<double>(z >> 11) + 0.5) / 9007199254740992.0;
  };
  std::vector<double> a(n);
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    a[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    norm += a[i] * a[i];
  }
  norm = std::sqrt(norm);
  for (double& v : a) v /= (norm > 0 ? norm : 1.0);
  return a;
}

}  // namespace

std::vector<std::vector<cplx>> extract_roots(const MultiplicationSystem& ms, std::uint64_t seed,
                                             double comm_tol) {
  if (ms.commutativity_error > comm_tol)
    fail(errc::non_commuting, "extract_roots: multiplication matrices do not commute");
  const int n = static_cast<int>(ms.matrices.size());
  const int r = ms.matrices.empty() ? 0 : ms.matrices[0].rows();
  if (r == 0) return {};

  std::uint64_t state = seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL;
  std::vector<Mat> xt(n);
  for (int i = 0; i < n; ++i) xt[i] = transpose(ms.matrices[i]);

  for (int attempt = 0; attempt < 5; ++attempt) {
    const std::vector<double> a = random_unit(n, state);
    Mat xh(r, r);
    for (int i = 0; i < n; ++i)
      for (int row = 0; row < r; ++row)
        for (int col = 0; col < r; ++col) xh(row, col) += a[i] * xt[i](row, col);

    const EigResult eig = eig_nonsymmetric(xh);
    bool separated = true;
    for (int i = 0; i < r && separated; ++i)
      for (int j = i + 1; j < r; ++j)
        if (std::abs(eig.values[i] - eig.values[j]) < 1e-6) {
          separated = false;
          break;
        }
    if (!separated) continue;

    std::vector<std::vector<cplx>> points;
    points.reserve(r);
    for (int k = 0; k < r; ++k) {
      const std::vector<cplx>& w = eig.vectors[k];
      cplx denom(0, 0);
      for (const cplx& wi : w) denom += std::conj(wi) * wi;
      std::vector<cplx> v(n);
      for (int i = 0; i < n; ++i) {
        cplx num(0, 0);
        for (int row = 0; row < r; ++row) {
          cplx xw(0, 0);
          for (int col = 0; col < r; ++col) xw += xt[i](row, col) * w[col];
          num += std::conj(w[row]) * xw;
        }
        v[i] = num / denom;
      }
      points.push_back(std::move(v));
    }
    return points;
  }
  fail(errc::degenerate_spectrum, "extract_roots: eigenvalues not separated after retries");
}

std::vector<BorderPolynomial> border_basis(const MultiplicationSystem& ms) {
  const QuotientBasis& basis = ms.basis;
  if (basis.kind == BasisKind::SvdPolynomial)
    fail(errc::not_order_ideal, "border_basis: requires a monomial basis");
  if (!basis.order_ideal)
    fail(errc::not_order_ideal, "border_basis: basis is not an order ideal");
  const int n = basis.n;
  const int r = basis.r;

  std::vector<BorderPolynomial> out;
  for (const Exponent& c : basis.border) {
    // First split c = x_i * b_j with b_j in B (deterministic: lowest i).
    int var = -1, j = -1;
    for (int i = 0; i < n && var < 0; ++i) {
      if (c.e[i] == 0) continue;
      Exponent b = c;
      b.e[i] -= 1;
      auto it = std::find(basis.monomials.begin(), basis.monomials.end(), b);
      if (it != basis.monomials.end()) {
        var = i;
        j = static_cast<int>(it - basis.monomials.begin());
      }
    }
    if (var < 0) continue;  // cannot happen for an order ideal
    Polynomial g(n);
    g.add_term(c, 1.0);
    for (int k = 0; k < r; ++k) g.add_term(basis.monomials[k], -ms.matrices[var](k, j));
    out.push_back({c, std::move(g)});
  }
  return out;
}

std::vector<BorderPolynomial> groebner_from_border(const std::vector<BorderPolynomial>& border,
                                                   const QuotientBasis& basis,
                                                   const MonomialOrder& order) {
  (void)order;
  if (basis.kind != BasisKind::StandardMonomials)
    fail(errc::not_standard_monomial_basis,
         "groebner_from_border: basis is not a standard-monomial set");
  std::set<Exponent> members(basis.monomials.begin(), basis.monomials.end());
  std::vector<BorderPolynomial> out;
  for (const BorderPolynomial& g : border) {
    // Corner: every proper divisor of the marked monomial lies in B.
    bool corner = true;
    for (int i = 0; i < g.marked.vars() && corner; ++i) {
      if (g.marked.e[i] == 0) continue;
      Exponent div = g.marked;
      div.e[i] -= 1;
      if (!members.count(div)) corner = false;
    }
    if (corner) out.push_back(g);
  }
  return out;
}

FilterResult verify_and_filter(const std::vector<std::vector<cplx>>& w, const PolySystem& system,
                               double accept_tol, bool real_mode, FlatCondition condition) {
  FilterResult out;
  for (const std::vector<cplx>& v : w) {
    bool keep = true;
    if (real_mode) {
      for (const cplx& vi : v)
        if (std::abs(vi.imag()) > accept_tol) {
          keep = false;
          break;
        }
    }
    double residual = 0.0;
    if (keep) {
      for (const Polynomial& h : system.equalities) {
        residual = std::max(residual, std::abs(h.evaluate(std::span<const cplx>(v))));
        if (residual > accept_tol) {
          keep = false;
          break;
        }
      }
    }
    if (keep && !system.inequalities.empty()) {
      std::vector<double> re(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) re[i] = v[i].real();
      for (const Polynomial& h : system.inequalities)
        if (h.evaluate(std::span<const double>(re)) < -accept_tol) {
          keep = false;
          break;
        }
    }
    if (keep) {
      out.kept.push_back(v);
      out.accuracy = std::max(out.accuracy, residual);
    } else {
      ++out.dropped;
    }
  }
  const bool strong =
      condition == FlatCondition::FlatD || condition == FlatCondition::FlatOneHighOrder;
  const bool all_survive = out.dropped == 0 && out.kept.size() == w.size();
  out.status = (out.dropped == 0 && (strong || all_survive))
                   ? ExtractionStatus::RadicalCertified
                   : ExtractionStatus::SupersetReturned;
  return out;
}

std::vector<Polynomial> kernel_basis(const Mat& m_s, int n, int s, const RankTolerances& tol) {
  MomentIndexMap idx(n, s);
  if (m_s.rows() != idx.size())
    fail(errc::dimension_mismatch, "kernel_basis: matrix does not match T_{n,s}");
  const SvdResult dec = svd(m_s);
  const int r = numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio);
  std::vector<Polynomial> out;
  for (int k = r; k < idx.size(); ++k) {
    Polynomial p(n);
    for (int i = 0; i < idx.size(); ++i) p.add_term(idx.monomial(i), dec.v(i, k));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mrv
