#include "mrv/moment.hpp"

#include <algorithm>
#include <cmath>

namespace mrv {

MomentIndexMap::MomentIndexMap(int n, int t) : n_(n), t_(t) {
  monomials_ = enumerate_monomials(n, t);
  for (int i = 0; i < static_cast<int>(monomials_.size()); ++i) lookup_[monomials_[i]] = i;
}

int MomentIndexMap::size_at(int degree) const { return binomial(n_ + degree, n_); }

int MomentIndexMap::index(const Exponent& a) const {
  auto it = lookup_.find(a);
  if (it == lookup_.end()) fail(errc::order_too_large, "monomial outside the index range");
  return it->second;
}

std::optional<int> MomentIndexMap::try_index(const Exponent& a) const {
  auto it = lookup_.find(a);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

MomentSequence moments_of_measure(const std::vector<std::vector<double>>& points,
                                  std::span<const double> weights, int n, int t) {
  if (points.size() != weights.size())
    fail(errc::dimension_mismatch, "moments_of_measure: points/weights mismatch");
  MomentSequence y(n, t);
  MomentIndexMap map(n, 2 * t);
  for (int i = 0; i < map.size(); ++i) {
    const Exponent& a = map.monomial(i);
    double s = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      double m = weights[p];
      for (int v = 0; v < n; ++v)
        for (int k = 0; k < a.e[v]; ++k) m *= points[p][v];
      s += m;
    }
    y.values[i] = s;
  }
  return y;
}

Mat assemble_moment_matrix(const MomentSequence& y, int s) {
  if (s > y.t) fail(errc::order_too_large, "assemble_moment_matrix: s exceeds sequence order");
  MomentIndexMap rows(y.n, s);
  MomentIndexMap full(y.n, 2 * y.t);
  const int dim = rows.size();
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const double v = y.values[full.index(rows.monomial(i) + rows.monomial(j))];
      m(i, j) = m(j, i) = v;
    }
  return m;
}

ShiftedSequence shift_sequence(const Polynomial& h, const MomentSequence& y) {
  const int dh = h.degree();
  if (dh > 2 * y.t) fail(errc::degree_too_large, "shift_sequence: deg(h) > 2t");
  ShiftedSequence out;
  out.n = y.n;
  out.max_degree = 2 * y.t - dh;
  MomentIndexMap target(y.n, out.max_degree);
  MomentIndexMap full(y.n, 2 * y.t);
  out.values.assign(target.size(), 0.0);
  for (int i = 0; i < target.size(); ++i) {
    double s = 0.0;
    for (const auto& [d, c] : h.terms()) s += c * y.values[full.index(target.monomial(i) + d)];
    out.values[i] = s;
  }
  return out;
}

Mat localizing_matrix(const Polynomial& h, const MomentSequence& y, int s) {
  const int dj = half_degree(h);
  if (s + dj > y.t) fail(errc::order_too_small, "localizing_matrix: s + d_j exceeds t");
  MomentIndexMap rows(y.n, s);
  MomentIndexMap full(y.n, 2 * y.t);
  const int dim = rows.size();
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const Exponent g = rows.monomial(i) + rows.monomial(j);
      double v = 0.0;
      for (const auto& [d, c] : h.terms()) v += c * y.values[full.index(g + d)];
      m(i, j) = m(j, i) = v;
    }
  return m;
}

LinearConstraintSystem localizing_equalities(const Polynomial& h, int t) {
  const int dj = half_degree(h);
  if (t < dj) fail(errc::order_too_small, "localizing_equalities: t < d_j");
  const int n = h.vars();
  MomentIndexMap gammas(n, 2 * (t - dj));
  LinearConstraintSystem sys;
  sys.rows.reserve(gammas.size());
  for (int i = 0; i < gammas.size(); ++i) {
    std::map<Exponent, double> row;
    for (const auto& [d, c] : h.terms()) row[gammas.monomial(i) + d] += c;
    sys.rows.push_back(std::move(row));
    sys.rhs.push_back(0.0);
  }
  return sys;
}

MomentSequence flat_extend(const MomentSequence& y, int s, double svd_zero_tol,
                           double gap_ratio, double consistency_tol) {
  if (s < 1 || s > y.t) fail(errc::order_too_small, "flat_extend: need 1 <= s <= t");
  const int n = y.n;
  const Mat ms = assemble_moment_matrix(y, s);
  const Mat mprev = assemble_moment_matrix(y, s - 1);
  const SvdResult svd_s = svd(ms);
  const SvdResult svd_prev = svd(mprev);
  const int rank_s = numerical_rank(svd_s.singular_values, svd_zero_tol, gap_ratio);
  const int rank_prev = numerical_rank(svd_prev.singular_values, svd_zero_tol, gap_ratio);
  if (rank_s != rank_prev)
    fail(errc::not_flat, "flat_extend: rank M_s != rank M_{s-1}");
  {
    const SymEigResult eig = eig_symmetric(ms);
    if (!eig.values.empty() && eig.values.back() < -1e-7 * std::max(1.0, ms.max_abs()))
      fail(errc::not_flat, "flat_extend: M_s not PSD to tolerance");
  }

  MomentIndexMap idx_s(n, s);
  MomentIndexMap idx_full(n, 2 * y.t);
  const int dim_s = idx_s.size();
  const int dim_prev = idx_s.size_at(s - 1);

  // Pseudoinverse of the column block of M_s indexed by T_{n,s-1}.
  Mat colblock(dim_s, dim_prev);
  for (int i = 0; i < dim_s; ++i)
    for (int j = 0; j < dim_prev; ++j) colblock(i, j) = ms(i, j);
  const SvdResult cb = svd(colblock);
  const int cb_rank = numerical_rank(cb.singular_values, svd_zero_tol, gap_ratio);
  auto pinv_apply = [&](std::span<const double> c) {
    std::vector<double> ut(cb_rank, 0.0);
    for (int k = 0; k < cb_rank; ++k) {
      double dot = 0.0;
      for (int i = 0; i < dim_s; ++i) dot += cb.u(i, k) * c[i];
      ut[k] = dot / cb.singular_values[k];
    }
    std::vector<double> lambda(dim_prev, 0.0);
    for (int j = 0; j < dim_prev; ++j) {
      double dot = 0.0;
      for (int k = 0; k < cb_rank; ++k) dot += cb.v(j, k) * ut[k];
      lambda[j] = dot;
    }
    return lambda;
  };

  // lambda expansions for every degree-(s+1) monomial and every split m = x_i * b.
  MomentIndexMap idx_next(n, s + 1);
  struct Split {
    Exponent m;
    int var;
    std::vector<double> lambda;
  };
  std::vector<Split> splits;
  for (int mi = dim_s; mi < idx_next.size(); ++mi) {
    const Exponent& m = idx_next.monomial(mi);
    for (int i = 0; i < n; ++i) {
      if (m.e[i] == 0) continue;
      Exponent b = m;
      b.e[i] -= 1;
      std::vector<double> col(dim_s);
      const int bj = idx_s.index(b);
      for (int r = 0; r < dim_s; ++r) col[r] = ms(r, bj);
      splits.push_back({m, i, pinv_apply(col)});
    }
  }

  MomentSequence out(n, s + 1);
  MomentIndexMap idx_out(n, 2 * (s + 1));
  for (int i = 0; i < idx_out.size(); ++i) {
    const Exponent& g = idx_out.monomial(i);
    if (g.degree() <= 2 * y.t) out.values[i] = y.values[idx_full.index(g)];
  }

  auto value_of = [&](const Exponent& g) { return out.values[idx_out.index(g)]; };

  std::map<Exponent, std::pair<double, std::pair<double, double>>> acc;  // sum, (min, max)
  std::map<Exponent, int> counts;

  auto run_phase = [&](int row_deg_min, int row_deg_max, int target_degree) {
    acc.clear();
    counts.clear();
    for (const Split& sp : splits) {
      for (int r = 0; r < idx_next.size(); ++r) {
        const Exponent& row = idx_next.monomial(r);
        const int rd = row.degree();
        if (rd < row_deg_min || rd > row_deg_max) continue;
        const Exponent g = row + sp.m;
        if (g.degree() != target_degree) continue;
        double v = 0.0;
        for (int a = 0; a < dim_prev; ++a) {
          if (sp.lambda[a] == 0.0) continue;
          Exponent shifted = idx_s.monomial(a);
          shifted.e[sp.var] += 1;
          v += sp.lambda[a] * value_of(row + shifted);
        }
        auto it = acc.find(g);
        if (it == acc.end()) {
          acc.emplace(g, std::make_pair(v, std::make_pair(v, v)));
          counts[g] = 1;
        } else {
          it->second.first += v;
          it->second.second.first = std::min(it->second.second.first, v);
          it->second.second.second = std::max(it->second.second.second, v);
          counts[g] += 1;
        }
      }
    }
    for (const auto& [g, data] : acc) {
      const double mean = data.first / counts[g];
      const double spread = data.second.second - data.second.first;
      if (spread > consistency_tol * (1.0 + std::abs(mean)))
        fail(errc::inconsistent_entries,
             "flat_extend: derivations of a new moment disagree beyond tolerance");
      out.values[idx_out.index(g)] = mean;
    }
  };

  // Degree 2s+1 entries come from rows of degree <= s; degree 2s+2 entries
  // then use the freshly filled 2s+1 values.
  run_phase(0, s, 2 * s + 1);
  run_phase(s + 1, s + 1, 2 * s + 2);
  return out;
}

}  // namespace mrv
