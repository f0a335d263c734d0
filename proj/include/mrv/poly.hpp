#pragma once

// Multi-index exponents, monomial orderings, sparse multivariate polynomials
// with double coefficients, parsing, printing and evaluation.

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mrv/errors.hpp"

namespace mrv {

// Exponent vector of a monomial x^a = x1^{a1}...xn^{an}.
struct Exponent {
  std::vector<int> e;

  Exponent() = default;
  explicit Exponent(std::vector<int> v) : e(std::move(v)) {}
  static Exponent zero(int n) { return Exponent(std::vector<int>(n, 0)); }
  static Exponent unit(int n, int i) {
    std::vector<int> v(n, 0);
    v[i] = 1;
    return Exponent(std::move(v));
  }

  int vars() const { return static_cast<int>(e.size()); }
  int degree() const;
  int operator[](int i) const { return e[i]; }

  bool operator==(const Exponent&) const = default;
  // Container order only (map keys); monomial comparison lives in MonomialOrder.
  auto operator<=>(const Exponent&) const = default;
};

Exponent operator+(const Exponent& a, const Exponent& b);
// a divides b componentwise.
bool divides(const Exponent& a, const Exponent& b);

enum class OrderKind { GradedLex, GradedRevLex, Lex };

struct MonomialOrder {
  OrderKind kind = OrderKind::GradedLex;
  // Variable indices from most to least significant; empty means x1 > x2 > ... > xn.
  std::vector<int> precedence;

  static MonomialOrder grlex() { return {}; }
  static MonomialOrder grevlex() { return {OrderKind::GradedRevLex, {}}; }
  static MonomialOrder lex() { return {OrderKind::Lex, {}}; }

  // -1 if a < b, 0 if equal, +1 if a > b.
  int compare(const Exponent& a, const Exponent& b) const;
  bool less(const Exponent& a, const Exponent& b) const { return compare(a, b) < 0; }
};

// All exponents of degree <= t in n variables, listed degree by degree and,
// within a degree, from the largest monomial down under `order` (so the
// default order yields 1, x1, x2, x1^2, x1*x2, x2^2, ...).  This listing is
// the row/column indexing convention for all moment matrices.
std::vector<Exponent> enumerate_monomials(int n, int t, const MonomialOrder& order = {});

int binomial(int n, int k);

class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}
  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int i);

  int vars() const { return nvars_; }
  int degree() const;  // -1 for the zero polynomial
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Exponent, double>& terms() const { return terms_; }
  double coefficient(const Exponent& a) const;

  // Adds c*x^a, merging with an existing term and dropping exact zeros.
  void add_term(const Exponent& a, double c);

  double evaluate(std::span<const double> point) const;
  std::complex<double> evaluate(std::span<const std::complex<double>> point) const;

  Polynomial& operator+=(const Polynomial& q);
  Polynomial& operator-=(const Polynomial& q);
  Polynomial& operator*=(double c);
  friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }
  friend Polynomial operator*(double c, Polynomial p) { return p *= c; }
  Polynomial operator*(const Polynomial& q) const;

  bool operator==(const Polynomial&) const = default;

private:
  int nvars_ = 0;
  std::map<Exponent, double> terms_;
};

// d_j = ceil(deg(h)/2).
int half_degree(const Polynomial& h);

// Expanded-form parser for `coeff*xi^e*...` terms joined by '+'/'-'.
Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& vars);

std::string to_string(const Polynomial& p, const std::vector<std::string>& vars);
std::string to_string(const Exponent& a, const std::vector<std::string>& vars);

// Generators of the ideal (equalities h_j = 0) plus optional semialgebraic
// inequalities (h_j >= 0).
struct PolySystem {
  int n = 0;
  std::vector<std::string> var_names;
  std::vector<Polynomial> equalities;
  std::vector<Polynomial> inequalities;

  // Half-degrees of all generators, equalities first.
  std::vector<int> half_degrees() const;
  int max_half_degree() const;
  void validate() const;  // m >= 1, each generator nonzero and nonconstant
};

}  // namespace mrv
