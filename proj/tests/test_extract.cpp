#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mrv/extract.hpp"

using namespace mrv;

namespace {

MomentSequence measure(const std::vector<std::vector<double>>& pts, int n, int t) {
  std::vector<double> w(pts.size(), 1.0 / static_cast<double>(pts.size()));
  return moments_of_measure(pts, w, n, t);
}

Polynomial from_text(const std::string& text, int n) {
  std::vector<std::string> vars;
  for (int i = 1; i <= n; ++i) vars.push_back("x" + std::to_string(i));
  return parse_polynomial(text, vars);
}

bool close_point(const std::vector<cplx>& v, const std::vector<double>& w, double tol) {
  if (v.size() != w.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i] - cplx(w[i], 0.0)) > tol) return false;
  return true;
}

bool coeffs_close(const Polynomial& p, const Polynomial& q, double tol) {
  std::set<Exponent> keys;
  for (const auto& [a, c] : p.terms()) keys.insert(a);
  for (const auto& [a, c] : q.terms()) keys.insert(a);
  for (const Exponent& a : keys)
    if (std::abs(p.coefficient(a) - q.coefficient(a)) > tol) return false;
  return true;
}

// Independence of monomials over a finite point set: full column rank of the
// Vandermonde block. The reference oracle for the sieve tests.
std::function<bool(const std::vector<Exponent>&)> vandermonde_oracle(
    const std::vector<std::vector<double>>& pts) {
  return [pts](const std::vector<Exponent>& t) {
    Mat v(static_cast<int>(pts.size()), static_cast<int>(t.size()));
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (std::size_t j = 0; j < t.size(); ++j) {
        double m = 1.0;
        for (int k = 0; k < t[j].vars(); ++k)
          for (int e = 0; e < t[j].e[k]; ++e) m *= pts[p][k];
        v(static_cast<int>(p), static_cast<int>(j)) = m;
      }
    return numerical_rank(svd(v).singular_values) == static_cast<int>(t.size());
  };
}

std::function<bool(const std::vector<Exponent>&)> moment_oracle(const Mat& m,
                                                                const MomentIndexMap& idx) {
  return [&m, &idx](const std::vector<Exponent>& t) {
    Mat sub(m.rows(), static_cast<int>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) {
      const int col = idx.index(t[j]);
      for (int i = 0; i < m.rows(); ++i) sub(i, static_cast<int>(j)) = m(i, col);
    }
    return numerical_rank(svd(sub).singular_values) == static_cast<int>(t.size());
  };
}

}  // namespace

TEST_CASE("certify_condition picks the strongest condition at the smallest order") {
  CHECK(certify_condition({1, 2, 2, 2, 7}, 3, 4) ==
        std::pair<int, FlatCondition>{2, FlatCondition::FlatOnePartial});
  CHECK(certify_condition({1, 2, 11}, 2, 2) ==
        std::pair<int, FlatCondition>{2, FlatCondition::PrebasisOnly});
  CHECK(certify_condition({1, 1, 1, 1}, 2, 3) ==
        std::pair<int, FlatCondition>{2, FlatCondition::FlatD});
  CHECK(certify_condition({1, 6, 12, 12}, 1, 3) ==
        std::pair<int, FlatCondition>{3, FlatCondition::FlatD});
  CHECK(certify_condition({1, 2, 2, 18}, 2, 3) ==
        std::pair<int, FlatCondition>{2, FlatCondition::FlatOnePartial});
}

TEST_CASE("rank_sequence of a point evaluation is all ones") {
  MomentSequence y = measure({{0.7, -0.4}}, 2, 3);
  RankReport report = rank_sequence(y, 3);
  CHECK(report.ranks == std::vector<int>{1, 1, 1, 1});
  CHECK(report.singular_values.size() == 4);
}

TEST_CASE("rank monotonicity along nested blocks of measure matrices") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const int k = 1 + trial % 5;
    std::vector<std::vector<double>> pts;
    for (int p = 0; p < k; ++p) {
      std::vector<double> v(n);
      for (double& x : v) x = dist(rng);
      pts.push_back(v);
    }
    MomentSequence y = measure(pts, n, 3);
    RankReport report = rank_sequence(y, 3);
    for (std::size_t s = 1; s < report.ranks.size(); ++s)
      CHECK(report.ranks[s] >= report.ranks[s - 1]);
    CHECK(report.ranks.back() <= k);
  }
}

TEST_CASE("svd_basis: rank one at the origin gives the constant") {
  MomentSequence y = measure({{0.0, 0.0}}, 2, 2);
  Mat m1 = assemble_moment_matrix(y, 1);
  QuotientBasis basis = svd_basis(m1, 2, 1);
  REQUIRE(basis.r == 1);
  CHECK(std::abs(std::abs(basis.coefficients(0, 0)) - 1.0) <= 1e-12);
  CHECK(std::abs(basis.coefficients(1, 0)) <= 1e-12);
  CHECK(std::abs(basis.coefficients(2, 0)) <= 1e-12);
}

TEST_CASE("svd_basis columns are orthonormal") {
  MomentSequence y = measure({{0.4, 0.1}, {-0.3, 0.9}, {0.8, -0.6}}, 2, 2);
  Mat m1 = assemble_moment_matrix(y, 1);
  QuotientBasis basis = svd_basis(m1, 2, 1);
  REQUIRE(basis.r == 3);
  for (int a = 0; a < basis.r; ++a)
    for (int b = 0; b < basis.r; ++b) {
      double dot = 0.0;
      for (int i = 0; i < basis.coefficients.rows(); ++i)
        dot += basis.coefficients(i, a) * basis.coefficients(i, b);
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-10);
    }
}

TEST_CASE("greedy_monomial_basis") {
  // Two roots of the cox3-style reduced system: B = {1, x1}.
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  Mat m1 = assemble_moment_matrix(y, 1);
  QuotientBasis basis = greedy_monomial_basis(m1, 2, 1);
  REQUIRE(basis.r == 2);
  CHECK(basis.monomials[0] == Exponent({0, 0}));
  CHECK(basis.monomials[1] == Exponent({1, 0}));
  CHECK(basis.order_ideal);
  // Border (U x_i B) \ B = {x2, x1^2, x1x2}.
  CHECK(basis.border.size() == 3);

  // Gauss roots: B = {1, x3}.
  const double a = 1.0 / std::sqrt(3.0);
  MomentSequence g = measure({{1.0, 1.0, -a, a}, {1.0, 1.0, a, -a}}, 4, 2);
  Mat gm1 = assemble_moment_matrix(g, 1);
  QuotientBasis gb = greedy_monomial_basis(gm1, 4, 1);
  REQUIRE(gb.r == 2);
  CHECK(gb.monomials[0] == Exponent({0, 0, 0, 0}));
  CHECK(gb.monomials[1] == Exponent({0, 0, 1, 0}));

  // Full rank: all of T_{n,1}.
  MomentSequence f = measure({{0.4, 0.1}, {-0.3, 0.9}, {0.8, -0.6}}, 2, 2);
  QuotientBasis fb = greedy_monomial_basis(assemble_moment_matrix(f, 1), 2, 1);
  CHECK(fb.monomials.size() == 3);
}

TEST_CASE("greedy sieve on the remark example ideal") {
  // I = <x^3 - 1, -y + x^2 + x + 1>; quotient basis {1, x, x^2}; reduction of
  // x^a y^b modulo the lex Groebner basis is exact integer arithmetic.
  auto reduce = [](const Exponent& m) {
    // Result: coefficients on {1, x, x^2} after substituting y and x^3 = 1.
    std::vector<long long> pow_x{0, 0, 0};
    pow_x[0] = 1;  // start with 1
    auto mul_x = [](std::vector<long long>& c) {
      std::vector<long long> out{c[2], c[0], c[1]};  // x * (a + bx + cx^2), x^3 = 1
      c = out;
    };
    std::vector<long long> acc{1, 0, 0};
    for (int k = 0; k < m.e[0]; ++k) mul_x(acc);
    // Multiply by (x^2 + x + 1)^b.
    for (int k = 0; k < m.e[1]; ++k) {
      std::vector<long long> out{0, 0, 0};
      std::vector<long long> term = acc;
      for (int shift = 0; shift < 3; ++shift) {
        for (int i = 0; i < 3; ++i) out[i] += term[i];
        mul_x(term);
      }
      acc = out;
    }
    return acc;
  };
  auto oracle = [&](const std::vector<Exponent>& t) {
    Mat v(3, static_cast<int>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) {
      std::vector<long long> c = reduce(t[j]);
      for (int i = 0; i < 3; ++i) v(i, static_cast<int>(j)) = static_cast<double>(c[i]);
    }
    return numerical_rank(svd(v).singular_values) == static_cast<int>(t.size());
  };

  MonomialOrder lex_yx{OrderKind::Lex, {1, 0}};  // y > x
  std::vector<Exponent> b2 = greedy_sieve(oracle, lex_yx, 2, 2);
  CHECK(b2 == std::vector<Exponent>{Exponent({0, 0}), Exponent({1, 0}), Exponent({2, 0})});
  std::vector<Exponent> b3 = greedy_sieve(oracle, lex_yx, 2, 3);
  CHECK(b3 == b2);  // stabilized: B_2 = B_3 = B_succ

  std::vector<Exponent> b1 = greedy_sieve(oracle, lex_yx, 2, 1);
  CHECK(b1 == std::vector<Exponent>{Exponent({0, 0}), Exponent({1, 0}), Exponent({0, 1})});

  // Graded order: the sieve returns the standard monomials directly.
  std::vector<Exponent> bg = greedy_sieve(oracle, MonomialOrder::grlex(), 2, 2);
  CHECK(bg.size() == 3);
  std::set<Exponent> bg_set(bg.begin(), bg.end());
  CHECK(bg_set.count(Exponent({0, 0})) == 1);
}

TEST_CASE("greedy sieve agrees with the Vandermonde oracle on random point sets") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  int tested = 0;
  for (int trial = 0; tested < 20; ++trial) {
    const int n = 2 + trial % 2;
    const int k = 2 + trial % 5;
    std::vector<std::vector<double>> pts;
    for (int p = 0; p < k; ++p) {
      std::vector<double> v(n);
      for (double& x : v) x = dist(rng);
      pts.push_back(v);
    }
    const int s = 3;
    MomentSequence y = measure(pts, n, s);
    Mat ms = assemble_moment_matrix(y, s);
    MomentIndexMap idx(n, s);

    for (const MonomialOrder& order : {MonomialOrder::grlex(), MonomialOrder::grevlex()}) {
      std::vector<Exponent> via_moment = greedy_sieve(moment_oracle(ms, idx), order, n, s);
      std::vector<Exponent> via_points = greedy_sieve(vandermonde_oracle(pts), order, n, s);
      CHECK(via_moment == via_points);
      CHECK(via_moment.size() == static_cast<std::size_t>(k));
    }
    ++tested;
  }
}

TEST_CASE("multiplication matrices on exact flat data") {
  // Roots (0,0) and (1,2): X_{x1} = [[0,0],[1,1]], X_{x2} = [[0,0],[2,2]].
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  Mat m2 = assemble_moment_matrix(y, 2);
  QuotientBasis basis = greedy_monomial_basis(assemble_moment_matrix(y, 1), 2, 1);
  MultiplicationSystem ms = multiplication_matrices(m2, 2, 2, basis);
  CHECK(ms.commutativity_error <= 1e-10);
  CHECK(ms.matrices[0](0, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(ms.matrices[0](0, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(ms.matrices[0](1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ms.matrices[0](1, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ms.matrices[1](1, 0) == doctest::Approx(2.0).epsilon(1e-9));

  // Single root: X_{x_i} = [v_i].
  MomentSequence single = measure({{0.3, -1.2}}, 2, 2);
  QuotientBasis b1 = greedy_monomial_basis(assemble_moment_matrix(single, 1), 2, 1);
  MultiplicationSystem ms1 =
      multiplication_matrices(assemble_moment_matrix(single, 2), 2, 2, b1);
  CHECK(ms1.matrices[0](0, 0) == doctest::Approx(0.3));
  CHECK(ms1.matrices[1](0, 0) == doctest::Approx(-1.2));

  // Gauss pair: X_{x3} = [[0, 1/3], [1, 0]].
  const double a = 1.0 / std::sqrt(3.0);
  MomentSequence g = measure({{1.0, 1.0, -a, a}, {1.0, 1.0, a, -a}}, 4, 2);
  QuotientBasis gb = greedy_monomial_basis(assemble_moment_matrix(g, 1), 4, 1);
  MultiplicationSystem gms = multiplication_matrices(assemble_moment_matrix(g, 2), 4, 2, gb);
  CHECK(gms.matrices[2](0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(gms.matrices[2](1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gms.matrices[2](0, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("multiplication matrices from the svd basis extract the same roots") {
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  Mat m2 = assemble_moment_matrix(y, 2);
  QuotientBasis basis = svd_basis(assemble_moment_matrix(y, 1), 2, 1);
  MultiplicationSystem ms = multiplication_matrices(m2, 2, 2, basis);
  CHECK(ms.commutativity_error <= 1e-9);
  std::vector<std::vector<cplx>> roots = extract_roots(ms, 1);
  REQUIRE(roots.size() == 2);
  bool a = close_point(roots[0], {0, 0}, 1e-7) && close_point(roots[1], {1, 2}, 1e-7);
  bool b = close_point(roots[1], {0, 0}, 1e-7) && close_point(roots[0], {1, 2}, 1e-7);
  CHECK((a || b));
}

TEST_CASE("multiplication matrix spectrum carries the coordinate values") {
  // X_{x1} for the two-root data has eigenvalues {0, 1}.
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  QuotientBasis basis = greedy_monomial_basis(assemble_moment_matrix(y, 1), 2, 1);
  MultiplicationSystem ms =
      multiplication_matrices(assemble_moment_matrix(y, 2), 2, 2, basis);
  EigResult eig = eig_nonsymmetric(ms.matrices[0]);
  std::vector<double> values;
  for (const cplx& v : eig.values) {
    CHECK(std::abs(v.imag()) <= 1e-9);
    values.push_back(v.real());
  }
  std::sort(values.begin(), values.end());
  CHECK(values[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(values[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("extract_roots reports an inseparable spectrum") {
  // Identical multiplication matrices with a repeated eigenvalue cannot be
  // separated by any random combination.
  MultiplicationSystem ms;
  ms.matrices.assign(2, Mat::identity(2));
  ms.commutativity_error = 0.0;
  try {
    extract_roots(ms, 0);
    FAIL("expected degenerate_spectrum");
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate_spectrum);
  }
}

TEST_CASE("extract_roots gates on commutation") {
  MultiplicationSystem ms;
  ms.matrices.push_back(Mat(2, 2));
  ms.matrices.push_back(Mat(2, 2));
  ms.matrices[0](0, 1) = 1.0;  // nilpotent
  ms.matrices[1](1, 0) = 1.0;
  ms.commutativity_error = 1.0;
  try {
    extract_roots(ms, 0);
    FAIL("expected non_commuting");
  } catch (const error& e) {
    CHECK(e.code() == errc::non_commuting);
  }
}

TEST_CASE("border basis on exact flat data") {
  // Roots (0,0), (1,2): border basis {x1^2 - x1, x2 - 2x1, x1x2 - 2x1}.
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  QuotientBasis basis = greedy_monomial_basis(assemble_moment_matrix(y, 1), 2, 1);
  MultiplicationSystem ms =
      multiplication_matrices(assemble_moment_matrix(y, 2), 2, 2, basis);
  std::vector<BorderPolynomial> border = border_basis(ms);
  REQUIRE(border.size() == 3);
  CHECK(coeffs_close(border[0].poly, from_text("x2-2*x1", 2), 1e-8));
  CHECK(coeffs_close(border[1].poly, from_text("x1^2-x1", 2), 1e-8));
  CHECK(coeffs_close(border[2].poly, from_text("x1*x2-2*x1", 2), 1e-8));

  // Single root v: {x_i - v_i}.
  MomentSequence single = measure({{0.3, -1.2}}, 2, 2);
  QuotientBasis b1 = greedy_monomial_basis(assemble_moment_matrix(single, 1), 2, 1);
  MultiplicationSystem ms1 =
      multiplication_matrices(assemble_moment_matrix(single, 2), 2, 2, b1);
  std::vector<BorderPolynomial> border1 = border_basis(ms1);
  REQUIRE(border1.size() == 2);
  CHECK(coeffs_close(border1[0].poly, from_text("x1-0.3", 2), 1e-9));
  CHECK(coeffs_close(border1[1].poly, from_text("x2+1.2", 2), 1e-9));
}

TEST_CASE("gauss border basis matches the seven reported polynomials") {
  const double a = 1.0 / std::sqrt(3.0);
  MomentSequence g = measure({{1.0, 1.0, -a, a}, {1.0, 1.0, a, -a}}, 4, 2);
  QuotientBasis basis = greedy_monomial_basis(assemble_moment_matrix(g, 1), 4, 1);
  MultiplicationSystem ms = multiplication_matrices(assemble_moment_matrix(g, 2), 4, 2, basis);
  std::vector<BorderPolynomial> border = border_basis(ms);
  REQUIRE(border.size() == 7);
  std::vector<Polynomial> expected{
      from_text("x1-1", 4),          from_text("x2-1", 4),
      from_text("x4+x3", 4),         from_text("x1*x3-x3", 4),
      from_text("x2*x3-x3", 4),      from_text("x3^2-0.33333333333333331", 4),
      from_text("x3*x4+0.33333333333333331", 4)};
  for (const Polynomial& e : expected) {
    bool found = false;
    for (const BorderPolynomial& b : border) found = found || coeffs_close(b.poly, e, 1e-8);
    CHECK(found);
  }
}

TEST_CASE("groebner_from_border") {
  // cox3-style: with grevlex x1 < x2 the reduced basis is {x1^2 - x1, x2 - 2x1}.
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  Mat m2 = assemble_moment_matrix(y, 2);
  MomentIndexMap idx(2, 2);
  MonomialOrder grevlex_x2_major{OrderKind::GradedRevLex, {1, 0}};
  std::vector<Exponent> b =
      greedy_sieve(moment_oracle(m2, idx), grevlex_x2_major, 2, 1);
  REQUIRE(b.size() == 2);
  QuotientBasis basis = basis_from_monomials(b, 2, 1, BasisKind::StandardMonomials);
  MultiplicationSystem ms = multiplication_matrices(m2, 2, 2, basis);
  std::vector<BorderPolynomial> border = border_basis(ms);
  std::vector<BorderPolynomial> gb = groebner_from_border(border, basis, grevlex_x2_major);
  REQUIRE(gb.size() == 2);
  CHECK(coeffs_close(gb[0].poly, from_text("x2-2*x1", 2), 1e-8));
  CHECK(coeffs_close(gb[1].poly, from_text("x1^2-x1", 2), 1e-8));

  // Reduced-ness: no returned leading term divides a standard monomial, and
  // every omitted border polynomial is marked by a multiple of a returned one.
  for (const BorderPolynomial& g : gb)
    for (const Exponent& sm : basis.monomials) CHECK(!divides(g.marked, sm));
  for (const BorderPolynomial& g : border) {
    bool returned = false;
    for (const BorderPolynomial& kept : gb) returned = returned || kept.marked == g.marked;
    if (returned) continue;
    bool divisible = false;
    for (const BorderPolynomial& kept : gb)
      divisible = divisible || divides(kept.marked, g.marked);
    CHECK(divisible);
  }

  // Wrong kind is rejected.
  QuotientBasis greedy = greedy_monomial_basis(assemble_moment_matrix(y, 1), 2, 1);
  try {
    groebner_from_border(border, greedy, grevlex_x2_major);
    FAIL("expected not_standard_monomial_basis");
  } catch (const error& e) {
    CHECK(e.code() == errc::not_standard_monomial_basis);
  }
}

TEST_CASE("gauss groebner basis drops the three redundant border polynomials") {
  const double a = 1.0 / std::sqrt(3.0);
  MomentSequence g = measure({{1.0, 1.0, -a, a}, {1.0, 1.0, a, -a}}, 4, 2);
  Mat m2 = assemble_moment_matrix(g, 2);
  MomentIndexMap idx(4, 2);
  MonomialOrder grlex_x3_last{OrderKind::GradedLex, {0, 1, 3, 2}};  // x1 > x2 > x4 > x3
  std::vector<Exponent> b = greedy_sieve(moment_oracle(m2, idx), grlex_x3_last, 4, 1);
  REQUIRE(b.size() == 2);
  QuotientBasis basis = basis_from_monomials(b, 4, 1, BasisKind::StandardMonomials);
  MultiplicationSystem ms = multiplication_matrices(m2, 4, 2, basis);
  std::vector<BorderPolynomial> border = border_basis(ms);
  REQUIRE(border.size() == 7);
  std::vector<BorderPolynomial> gb = groebner_from_border(border, basis, grlex_x3_last);
  CHECK(gb.size() == 4);  // x1, x2, x4, x3^2 are the corners
  std::set<Exponent> marked;
  for (const BorderPolynomial& p : gb) marked.insert(p.marked);
  CHECK(marked.count(Exponent({1, 0, 0, 0})) == 1);
  CHECK(marked.count(Exponent({0, 1, 0, 0})) == 1);
  CHECK(marked.count(Exponent({0, 0, 0, 1})) == 1);
  CHECK(marked.count(Exponent({0, 0, 2, 0})) == 1);
}

TEST_CASE("one-variable groebner trivial case") {
  MomentSequence y = measure({{0.7}}, 1, 2);
  Mat m2 = assemble_moment_matrix(y, 2);
  MomentIndexMap idx(1, 2);
  std::vector<Exponent> b = greedy_sieve(moment_oracle(m2, idx), MonomialOrder::grlex(), 1, 1);
  QuotientBasis basis = basis_from_monomials(b, 1, 1, BasisKind::StandardMonomials);
  MultiplicationSystem ms = multiplication_matrices(m2, 1, 2, basis);
  std::vector<BorderPolynomial> border = border_basis(ms);
  std::vector<BorderPolynomial> gb = groebner_from_border(border, basis, MonomialOrder::grlex());
  REQUIRE(gb.size() == 1);
  CHECK(coeffs_close(gb[0].poly, from_text("x1-0.7", 1), 1e-9));
}

TEST_CASE("verify_and_filter") {
  PolySystem sys;
  sys.n = 2;
  sys.var_names = {"x1", "x2"};
  sys.equalities.push_back(from_text("x1^2-x1", 2));
  sys.equalities.push_back(from_text("x2-2*x1", 2));

  std::vector<std::vector<cplx>> w{{cplx(0, 0), cplx(0, 0)}, {cplx(1, 0), cplx(2, 0)}};
  FilterResult keep = verify_and_filter(w, sys, 1e-4, true, FlatCondition::FlatOnePartial);
  CHECK(keep.kept.size() == 2);
  CHECK(keep.dropped == 0);
  CHECK(keep.status == ExtractionStatus::RadicalCertified);

  w.push_back({cplx(0.5, 0), cplx(0.5, 0)});  // spurious
  FilterResult drop = verify_and_filter(w, sys, 1e-4, true, FlatCondition::FlatOnePartial);
  CHECK(drop.kept.size() == 2);
  CHECK(drop.dropped == 1);
  CHECK(drop.status == ExtractionStatus::SupersetReturned);

  // Imaginary contamination is dropped in real mode.
  std::vector<std::vector<cplx>> imag{{cplx(0, 0.01), cplx(0, 0)}};
  FilterResult imag_out = verify_and_filter(imag, sys, 1e-4, true, FlatCondition::FlatD);
  CHECK(imag_out.kept.empty());

  // Inequality violations are dropped.
  PolySystem box = sys;
  box.inequalities.push_back(from_text("x1-0.5", 2));  // x1 >= 0.5 kills (0,0)
  FilterResult boxed = verify_and_filter(
      {{cplx(0, 0), cplx(0, 0)}, {cplx(1, 0), cplx(2, 0)}}, box, 1e-4, true,
      FlatCondition::FlatOnePartial);
  CHECK(boxed.kept.size() == 1);
}

TEST_CASE("kernel_basis") {
  // Full rank: empty kernel.
  MomentSequence f = measure({{0.4, 0.1}, {-0.3, 0.9}, {0.8, -0.6}}, 2, 1);
  CHECK(kernel_basis(assemble_moment_matrix(f, 1), 2, 1).empty());

  // Two points on a line: the kernel of M_1 recovers the line.
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 1);
  std::vector<Polynomial> kb = kernel_basis(assemble_moment_matrix(y, 1), 2, 1);
  REQUIRE(kb.size() == 1);
  std::vector<double> p1{0.0, 0.0}, p2{1.0, 2.0};
  CHECK(std::abs(kb[0].evaluate(p1)) <= 1e-10);
  CHECK(std::abs(kb[0].evaluate(p2)) <= 1e-10);
}

TEST_CASE("prebasis rank test") {
  MomentSequence y = measure({{0.0, 0.0}, {1.0, 2.0}}, 2, 2);
  Mat m2 = assemble_moment_matrix(y, 2);
  QuotientBasis basis = greedy_monomial_basis(assemble_moment_matrix(y, 1), 2, 1);
  CHECK(prebasis_rank_ok(m2, 2, 2, basis));

  // Three generic points with a two-element basis fail the test.
  MomentSequence z = measure({{0.0, 0.0}, {1.0, 2.0}, {-0.5, 0.7}}, 2, 2);
  Mat mz = assemble_moment_matrix(z, 2);
  CHECK(!prebasis_rank_ok(mz, 2, 2, basis));
}
