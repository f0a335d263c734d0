#pragma once

// Rank-sequence analysis and flatness certification, quotient-basis selection
// (SVD / greedy monomial / sieve of standard monomials), multiplication
// matrices, eigenvalue root extraction, and border/Groebner basis output.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mrv/linalg.hpp"
#include "mrv/moment.hpp"
#include "mrv/poly.hpp"

namespace mrv {

enum class FlatCondition { FlatD, FlatOneHighOrder, FlatOnePartial, PrebasisOnly, None };

const char* to_string(FlatCondition c);

struct RankTolerances {
  double svd_zero = 1e-8;
  double gap_ratio = 1e-3;
};

struct RankReport {
  std::vector<int> ranks;  // numerical ranks of M_0(y)..M_t(y)
  std::vector<std::vector<double>> singular_values;
  int s = 0;
  FlatCondition condition = FlatCondition::None;
};

RankReport rank_sequence(const MomentSequence& y, int t, const RankTolerances& tol = {});

// Strongest certificate available, smallest order first:
//   FlatD:            rank M_s = rank M_{s-d} for some d <= s <= t
//   FlatOneHighOrder: rank M_s = rank M_{s-1} for some 2d <= s <= t
//   FlatOnePartial:   rank M_s = rank M_{s-1} for some 1 <= s <= t
//   PrebasisOnly:     no rank condition; the border prebasis probe at s = t.
std::pair<int, FlatCondition> certify_condition(const std::vector<int>& ranks, int d, int t);

// Ranks of nested principal blocks of an arbitrary symmetric matrix whose
// indexing is T_{n,smax} (used for the pruned/full complex matrices too).
std::vector<int> nested_ranks(const Mat& m, const std::vector<int>& block_dims,
                              const RankTolerances& tol,
                              std::vector<std::vector<double>>* sigmas = nullptr);

enum class BasisKind { SvdPolynomial, GreedyMonomial, StandardMonomials };

struct QuotientBasis {
  BasisKind kind = BasisKind::GreedyMonomial;
  int r = 0;
  int n = 0;
  int max_degree = 0;               // elements live in T_{n,max_degree}
  std::vector<Exponent> monomials;  // monomial kinds
  Mat coefficients;                 // svd kind: orthonormal columns over T_{n,max_degree}
  bool order_ideal = false;
  std::vector<Exponent> border;     // monomial kinds: (U_i x_i B) \ B
};

// Orthonormal polynomial basis of the column space of M_{s-1}(y).
QuotientBasis svd_basis(const Mat& m_prev, int n, int degree, const RankTolerances& tol = {});

// Scans T_{n,degree} by the canonical enumeration, keeping monomials whose
// columns stay independent, until rank many are found.
QuotientBasis greedy_monomial_basis(const Mat& m_prev, int n, int degree,
                                    const RankTolerances& tol = {});

// Algorithm "greedy sieve": returns a set B containing B_order /\ T_{n,s};
// under a graded order B is a subset of the standard monomials.
std::vector<Exponent> greedy_sieve(
    const std::function<bool(const std::vector<Exponent>&)>& independent,
    const MonomialOrder& order, int n, int s);

// Wraps a sieve result into a quotient basis against M_{s-1} data.
QuotientBasis basis_from_monomials(std::vector<Exponent> monomials, int n, int degree,
                                   BasisKind kind);

struct MultiplicationSystem {
  std::vector<Mat> matrices;  // X_1..X_n, r x r
  double commutativity_error = 0.0;
  QuotientBasis basis;
};

// Multiplication matrices from M_s (indexed by T_{n,s}) in the given basis.
MultiplicationSystem multiplication_matrices(const Mat& m_s, int n, int s,
                                             const QuotientBasis& basis,
                                             const RankTolerances& tol = {});

// Border prebasis rank test: the (B u dB)-indexed principal block of M_s has
// the same rank as |B|.
bool prebasis_rank_ok(const Mat& m_s, int n, int s, const QuotientBasis& basis,
                      const RankTolerances& tol = {});

// Eigenvalue method on a random unit combination of the multiplication
// matrices; coordinates read off as Rayleigh quotients on shared eigenvectors.
std::vector<std::vector<cplx>> extract_roots(const MultiplicationSystem& ms, std::uint64_t seed,
                                             double comm_tol = 1e-2);

struct BorderPolynomial {
  Exponent marked;  // border monomial, unit coefficient
  Polynomial poly;  // marked - sum a_ij b_i, support in B u {marked}
};

std::vector<BorderPolynomial> border_basis(const MultiplicationSystem& ms);

// Subset of the border basis marked by the corners of B; the reduced Groebner
// basis when B is the set of standard monomials for `order`.
std::vector<BorderPolynomial> groebner_from_border(const std::vector<BorderPolynomial>& border,
                                                   const QuotientBasis& basis,
                                                   const MonomialOrder& order);

enum class ExtractionStatus { RadicalCertified, SupersetReturned };

struct FilterResult {
  std::vector<std::vector<cplx>> kept;
  double accuracy = 0.0;
  int dropped = 0;
  ExtractionStatus status = ExtractionStatus::SupersetReturned;
};

// Drops points violating an equality beyond accept_tol, an inequality below
// -accept_tol, or (real mode) carrying imaginary parts beyond accept_tol.
FilterResult verify_and_filter(const std::vector<std::vector<cplx>>& w, const PolySystem& system,
                               double accept_tol, bool real_mode, FlatCondition condition);

// Right singular vectors past the rank cut, as polynomials of degree <= s.
std::vector<Polynomial> kernel_basis(const Mat& m_s, int n, int s,
                                     const RankTolerances& tol = {});

}  // namespace mrv
