#pragma once

// Complex-variety pipeline for real-coefficient generators, working entirely
// in real arithmetic on real-valued full complex moment matrices.  Rows and
// columns of the full matrix are conjugate-degree pairs (a, a') standing for
// conj(x)^a x^{a'}; the pruned matrix is the principal submatrix with a = 0.

#include <utility>
#include <vector>

#include "mrv/extract.hpp"
#include "mrv/sdp.hpp"

namespace mrv {

// One stored value per unordered pair {a, b} with |a|+|b| <= 2t; real-valued
// sequences satisfy y_{ab} = y_{ba} so the pair order is immaterial.
class ComplexIndexMap {
public:
  ComplexIndexMap() = default;
  ComplexIndexMap(int n, int two_t);

  int n() const { return n_; }
  int max_total_degree() const { return two_t_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  int index(const Exponent& a, const Exponent& b) const;
  const std::pair<Exponent, Exponent>& pair(int i) const { return pairs_[i]; }

private:
  int n_ = 0, two_t_ = 0;
  std::vector<std::pair<Exponent, Exponent>> pairs_;
  std::map<std::pair<Exponent, Exponent>, int> lookup_;
};

struct ComplexMomentSequence {
  int n = 0;
  int t = 0;
  std::vector<double> values;  // indexed by ComplexIndexMap(n, 2t)
};

// Conjugate-pair index set of the full matrix at order t, in the canonical
// T_{2n,t} enumeration (so lower orders are prefixes).
std::vector<std::pair<Exponent, Exponent>> conj_pair_monomials(int n, int t);

// Full-matrix moment SDP: main PSD block indexed by the conjugate pairs of
// total degree <= t, localizing equalities M^{2C}_{t-d_j}(h_j y) = 0 row by
// row, y_{00} = 1.  Generators must have real coefficients (Polynomial
// enforces this by construction).
SdpProblem build_full_complex_problem(const PolySystem& system, int t);

ComplexMomentSequence complex_sequence_from(std::vector<double> y, int n, int t);

// M^{2C}_s(y): entry ((a,a'),(b,b')) = y_{a'+b, a+b'}.
Mat full_complex_matrix(const ComplexMomentSequence& y, int s);

// M^C_s(y): entry (a',b') = y_{a'b'} over T_{n,s}; symmetric but in general
// indefinite.
Mat pruned_matrix(const ComplexMomentSequence& y, int s);

// Complex-mode analogues of the flatness conditions: FlatD when
// rank M^{2C}_s = rank M^C_{s-d}, the one-step conditions with s-1.
std::pair<int, FlatCondition> certify_complex_condition(const std::vector<int>& full_ranks,
                                                        const std::vector<int>& pruned_ranks,
                                                        int d, int t);

}  // namespace mrv
