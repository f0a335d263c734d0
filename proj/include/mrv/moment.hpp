#pragma once

// Truncated moment matrices: index maps, assembly, shifted sequences,
// localizing equality/inequality structure, and flat extension.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mrv/linalg.hpp"
#include "mrv/poly.hpp"

namespace mrv {

// Bijection between T_{n,t} and matrix/vector positions, in the canonical
// enumeration (degree-ascending).  T_{n,s} is a prefix of T_{n,t} for s <= t.
class MomentIndexMap {
public:
  MomentIndexMap() = default;
  MomentIndexMap(int n, int t);

  int n() const { return n_; }
  int max_degree() const { return t_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  int size_at(int degree) const;  // |T_{n,degree}|
  const std::vector<Exponent>& monomials() const { return monomials_; }
  const Exponent& monomial(int i) const { return monomials_[i]; }
  int index(const Exponent& a) const;          // throws order_too_large when deg > t
  std::optional<int> try_index(const Exponent& a) const;

private:
  int n_ = 0, t_ = 0;
  std::vector<Exponent> monomials_;
  std::map<Exponent, int> lookup_;
};

// The SDP decision variable: one real value per monomial of degree <= 2t.
struct MomentSequence {
  int n = 0;
  int t = 0;
  std::vector<double> values;  // indexed by MomentIndexMap(n, 2t)

  MomentSequence() = default;
  MomentSequence(int n_, int t_) : n(n_), t(t_), values(binomial(n_ + 2 * t_, n_), 0.0) {}
};

// Moment sequence of the finite measure sum_i weights[i] * delta_{points[i]},
// truncated at degree 2t.
MomentSequence moments_of_measure(const std::vector<std::vector<double>>& points,
                                  std::span<const double> weights, int n, int t);

// M_s(y): entry (a, b) = y_{a+b} over T_{n,s}.
Mat assemble_moment_matrix(const MomentSequence& y, int s);

// (hy)_g = sum_d h_d y_{g+d} for |g| <= 2t - deg(h).
struct ShiftedSequence {
  int n = 0;
  int max_degree = 0;  // 2t - deg(h)
  std::vector<double> values;
};

ShiftedSequence shift_sequence(const Polynomial& h, const MomentSequence& y);

// M_s(hy): entry (a, b) = (hy)_{a+b} over T_{n,s}; requires s + d_h <= t.
Mat localizing_matrix(const Polynomial& h, const MomentSequence& y, int s);

// Linear equality rows over the y variables, keyed by exponent.
struct LinearConstraintSystem {
  std::vector<std::map<Exponent, double>> rows;
  std::vector<double> rhs;
};

// M_{t-d_j}(h_j y) = 0 deduplicated to one row per exponent g in T_{n,2(t-d_j)}:
// sum_d h_d y_{g+d} = 0.
LinearConstraintSystem localizing_equalities(const Polynomial& h, int t);

// Flat extension: given rank M_s(y) = rank M_{s-1}(y) with M_s(y) PSD, extend
// y to order s+1 so that M_{s+1} keeps the same rank.  New entries derived
// from multiple monomial factorizations are averaged; a disagreement beyond
// tolerance reports inconsistent_entries.
MomentSequence flat_extend(const MomentSequence& y, int s, double svd_zero_tol = 1e-8,
                           double gap_ratio = 1e-3, double consistency_tol = 1e-6);

}  // namespace mrv
