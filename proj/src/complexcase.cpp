#include "mrv/complexcase.hpp"

#include <algorithm>
#include <set>

namespace mrv {

namespace {

std::pair<Exponent, Exponent> canonical(Exponent a, Exponent b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::pair<Exponent, Exponent> split_pair(const Exponent& g, int n) {
  Exponent a, b;
  a.e.assign(g.e.begin(), g.e.begin() + n);
  b.e.assign(g.e.begin() + n, g.e.end());
  return {std::move(a), std::move(b)};
}

}  // namespace

ComplexIndexMap::ComplexIndexMap(int n, int two_t) : n_(n), two_t_(two_t) {
  for (const Exponent& g : enumerate_monomials(2 * n, two_t)) {
    auto [a, b] = split_pair(g, n);
    auto key = canonical(a, b);
    if (lookup_.count(key)) continue;
    lookup_[key] = static_cast<int>(pairs_.size());
    pairs_.push_back(key);
  }
}

int ComplexIndexMap::index(const Exponent& a, const Exponent& b) const {
  auto it = lookup_.find(canonical(a, b));
  if (it == lookup_.end()) fail(errc::order_too_large, "conjugate pair outside the index range");
  return it->second;
}

std::vector<std::pair<Exponent, Exponent>> conj_pair_monomials(int n, int t) {
  std::vector<std::pair<Exponent, Exponent>> out;
  for (const Exponent& g : enumerate_monomials(2 * n, t)) out.push_back(split_pair(g, n));
  return out;
}

SdpProblem build_full_complex_problem(const PolySystem& system, int t) {
  system.validate();
  if (!system.inequalities.empty())
    fail(errc::parse_error, "complex mode supports equality generators only");
  const int d = system.max_half_degree();
  if (t < d) fail(errc::order_too_small, "build_full_complex_problem: t < d");
  const int n = system.n;
  ComplexIndexMap vars(n, 2 * t);

  SdpProblem p;
  p.num_vars = vars.size();
  p.n = n;
  p.t = t;

  const std::vector<std::pair<Exponent, Exponent>> rows = conj_pair_monomials(n, t);
  SdpBlock main;
  main.dim = static_cast<int>(rows.size());
  for (int i = 0; i < main.dim; ++i)
    for (int j = i; j < main.dim; ++j) {
      const auto& [a, ap] = rows[i];
      const auto& [b, bp] = rows[j];
      main.terms.push_back({i, j, vars.index(ap + b, a + bp), 1.0});
    }
  p.blocks.push_back(std::move(main));

  p.trace_coeffs.assign(p.num_vars, 0.0);
  for (const auto& [a, ap] : rows) p.trace_coeffs[vars.index(ap + a, a + ap)] += 1.0;

  SdpLinearRow y0;
  y0.coeffs.push_back({vars.index(Exponent::zero(n), Exponent::zero(n)), 1.0});
  y0.rhs = 1.0;
  p.equalities.push_back(std::move(y0));

  // Localizing equalities: (h y)_{a a'} = sum_b h_b y_{a', a+b} = 0 for every
  // conjugate pair of total degree <= 2(t - d_j); duplicates removed.
  std::set<std::vector<std::pair<int, double>>> seen;
  for (const Polynomial& h : system.equalities) {
    const int dj = half_degree(h);
    for (const auto& [a, ap] : conj_pair_monomials(n, 2 * (t - dj))) {
      std::map<int, double> row;
      for (const auto& [b, c] : h.terms()) row[vars.index(ap, a + b)] += c;
      std::vector<std::pair<int, double>> flat(row.begin(), row.end());
      if (!seen.insert(flat).second) continue;
      SdpLinearRow lr;
      lr.coeffs = std::move(flat);
      lr.rhs = 0.0;
      p.equalities.push_back(std::move(lr));
    }
  }
  return p;
}

ComplexMomentSequence complex_sequence_from(std::vector<double> y, int n, int t) {
  ComplexMomentSequence seq;
  seq.n = n;
  seq.t = t;
  seq.values = std::move(y);
  return seq;
}

Mat full_complex_matrix(const ComplexMomentSequence& y, int s) {
  if (s > y.t) fail(errc::order_too_large, "full_complex_matrix: s exceeds sequence order");
  ComplexIndexMap vars(y.n, 2 * y.t);
  const std::vector<std::pair<Exponent, Exponent>> rows = conj_pair_monomials(y.n, s);
  const int dim = static_cast<int>(rows.size());
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const auto& [a, ap] = rows[i];
      const auto& [b, bp] = rows[j];
      const double v = y.values[vars.index(ap + b, a + bp)];
      m(i, j) = m(j, i) = v;
    }
  return m;
}

Mat pruned_matrix(const ComplexMomentSequence& y, int s) {
  if (s > y.t) fail(errc::order_too_large, "pruned_matrix: s exceeds sequence order");
  ComplexIndexMap vars(y.n, 2 * y.t);
  MomentIndexMap idx(y.n, s);
  const int dim = idx.size();
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const double v = y.values[vars.index(idx.monomial(i), idx.monomial(j))];
      m(i, j) = m(j, i) = v;
    }
  return m;
}

std::pair<int, FlatCondition> certify_complex_condition(const std::vector<int>& full_ranks,
                                                        const std::vector<int>& pruned_ranks,
                                                        int d, int t) {
  for (int s = d; s <= t; ++s)
    if (full_ranks[s] == pruned_ranks[s - d]) return {s, FlatCondition::FlatD};
  for (int s = std::max(2 * d, 1); s <= t; ++s)
    if (full_ranks[s] == pruned_ranks[s - 1]) return {s, FlatCondition::FlatOneHighOrder};
  for (int s = 1; s <= t; ++s)
    if (full_ranks[s] == pruned_ranks[s - 1]) return {s, FlatCondition::FlatOnePartial};
  return {t, FlatCondition::None};
}

}  // namespace mrv
