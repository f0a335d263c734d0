#include "mrv/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mrv {

int Exponent::degree() const { return std::accumulate(e.begin(), e.end(), 0); }

Exponent operator+(const Exponent& a, const Exponent& b) {
  if (a.vars() != b.vars()) fail(errc::dimension_mismatch, "exponent sizes differ");
  Exponent r = a;
  for (int i = 0; i < b.vars(); ++i) r.e[i] += b.e[i];
  return r;
}

bool divides(const Exponent& a, const Exponent& b) {
  if (a.vars() != b.vars()) fail(errc::dimension_mismatch, "exponent sizes differ");
  for (int i = 0; i < a.vars(); ++i)
    if (a.e[i] > b.e[i]) return false;
  return true;
}

int MonomialOrder::compare(const Exponent& a, const Exponent& b) const {
  const int n = a.vars();
  if (n != b.vars()) fail(errc::dimension_mismatch, "exponent sizes differ");
  if (!precedence.empty() && static_cast<int>(precedence.size()) != n)
    fail(errc::dimension_mismatch, "precedence size differs from variable count");
  auto var = [&](int k) { return precedence.empty() ? k : precedence[k]; };

  if (kind != OrderKind::Lex) {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db ? -1 : 1;
  }
  if (kind == OrderKind::GradedRevLex) {
    // Equal degree: the smaller trailing exponent (least significant variable
    // first) wins.
    for (int k = n - 1; k >= 0; --k) {
      const int i = var(k);
      if (a.e[i] != b.e[i]) return a.e[i] < b.e[i] ? 1 : -1;
    }
    return 0;
  }
  for (int k = 0; k < n; ++k) {
    const int i = var(k);
    if (a.e[i] != b.e[i]) return a.e[i] > b.e[i] ? 1 : -1;
  }
  return 0;
}

namespace {

void gen_exponents(int n, int t, int pos, Exponent& cur, std::vector<Exponent>& out) {
  if (pos == n) {
    out.push_back(cur);
    return;
  }
  for (int k = 0; k <= t; ++k) {
    cur.e[pos] = k;
    gen_exponents(n, t - k, pos + 1, cur, out);
  }
  cur.e[pos] = 0;
}

}  // namespace

std::vector<Exponent> enumerate_monomials(int n, int t, const MonomialOrder& order) {
  if (n < 1 || t < 0) fail(errc::dimension_mismatch, "enumerate_monomials: need n >= 1, t >= 0");
  std::vector<Exponent> out;
  out.reserve(binomial(n + t, n));
  Exponent cur = Exponent::zero(n);
  gen_exponents(n, t, 0, cur, out);
  std::sort(out.begin(), out.end(), [&](const Exponent& a, const Exponent& b) {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return order.compare(a, b) > 0;
  });
  return out;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Exponent::zero(nvars), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  Polynomial p(nvars);
  p.add_term(Exponent::unit(nvars, i), 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [a, c] : terms_) d = std::max(d, a.degree());
  return d;
}

double Polynomial::coefficient(const Exponent& a) const {
  auto it = terms_.find(a);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponent& a, double c) {
  if (a.vars() != nvars_) fail(errc::dimension_mismatch, "term has wrong variable count");
  auto [it, inserted] = terms_.emplace(a, c);
  if (!inserted) it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

template <typename Scalar>
static Scalar evaluate_impl(const std::map<Exponent, double>& terms, int nvars,
                            std::span<const Scalar> point) {
  if (static_cast<int>(point.size()) != nvars)
    fail(errc::dimension_mismatch, "point dimension differs from variable count");
  Scalar total{};
  for (const auto& [a, c] : terms) {
    Scalar m{c};
    for (int i = 0; i < nvars; ++i)
      for (int k = 0; k < a.e[i]; ++k) m *= point[i];
    total += m;
  }
  return total;
}

double Polynomial::evaluate(std::span<const double> point) const {
  return evaluate_impl<double>(terms_, nvars_, point);
}

std::complex<double> Polynomial::evaluate(std::span<const std::complex<double>> point) const {
  return evaluate_impl<std::complex<double>>(terms_, nvars_, point);
}

Polynomial& Polynomial::operator+=(const Polynomial& q) {
  for (const auto& [a, c] : q.terms_) add_term(a, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& q) {
  for (const auto& [a, c] : q.terms_) add_term(a, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [a, v] : terms_) v *= c;
  return *this;
}

Polynomial Polynomial::operator*(const Polynomial& q) const {
  Polynomial r(nvars_);
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : q.terms_) r.add_term(a + b, ca * cb);
  return r;
}

int half_degree(const Polynomial& h) {
  if (h.is_zero()) fail(errc::zero_polynomial, "half_degree of the zero polynomial");
  return (h.degree() + 1) / 2;
}

namespace {

struct Lexer {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
};

bool read_number(Lexer& lx, double& out) {
  lx.skip_ws();
  std::size_t start = lx.pos;
  std::size_t i = lx.pos;
  auto digits = [&](std::size_t& j) {
    std::size_t c = 0;
    while (j < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[j]))) ++j, ++c;
    return c;
  };
  std::size_t intpart = digits(i);
  std::size_t frac = 0;
  if (i < lx.s.size() && lx.s[i] == '.') {
    ++i;
    frac = digits(i);
  }
  if (intpart == 0 && frac == 0) return false;
  if (i < lx.s.size() && (lx.s[i] == 'e' || lx.s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < lx.s.size() && (lx.s[j] == '+' || lx.s[j] == '-')) ++j;
    if (digits(j) > 0) i = j;
  }
  out = std::stod(lx.s.substr(start, i - start));
  lx.pos = i;
  return true;
}

bool read_identifier(Lexer& lx, std::string& out) {
  lx.skip_ws();
  std::size_t i = lx.pos;
  if (i >= lx.s.size() || !(std::isalpha(static_cast<unsigned char>(lx.s[i])) || lx.s[i] == '_'))
    return false;
  std::size_t start = i;
  while (i < lx.s.size() &&
         (std::isalnum(static_cast<unsigned char>(lx.s[i])) || lx.s[i] == '_'))
    ++i;
  out = lx.s.substr(start, i - start);
  lx.pos = i;
  return true;
}

int read_integer(Lexer& lx) {
  lx.skip_ws();
  std::size_t i = lx.pos;
  std::size_t start = i;
  while (i < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[i]))) ++i;
  if (i == start) fail(errc::malformed_term, "expected integer exponent at '" + lx.s.substr(lx.pos) + "'");
  lx.pos = i;
  return std::stoi(lx.s.substr(start, i - start));
}

}  // namespace

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& vars) {
  const int n = static_cast<int>(vars.size());
  Polynomial p(n);
  Lexer lx{text};
  bool any_term = false;

  while (!lx.eof()) {
    double sign = 1.0;
    // Leading sign of the term (required between terms, optional on the first).
    char c = lx.peek();
    if (c == '+' || c == '-') {
      sign = (c == '-') ? -1.0 : 1.0;
      ++lx.pos;
    } else if (any_term) {
      fail(errc::malformed_term, "expected '+' or '-' before '" + text.substr(lx.pos) + "'");
    }
    if (lx.eof()) fail(errc::malformed_term, "dangling sign in '" + text + "'");

    double coeff = 1.0;
    bool saw_number = read_number(lx, coeff);
    bool saw_factor = false;
    Exponent exp = Exponent::zero(n);

    if (saw_number && lx.peek() == '*') ++lx.pos;
    while (true) {
      std::string name;
      if (!read_identifier(lx, name)) break;
      auto it = std::find(vars.begin(), vars.end(), name);
      if (it == vars.end()) fail(errc::unknown_variable, "unknown variable '" + name + "'");
      int vi = static_cast<int>(it - vars.begin());
      int power = 1;
      if (lx.peek() == '^') {
        ++lx.pos;
        power = read_integer(lx);
      }
      exp.e[vi] += power;
      saw_factor = true;
      if (lx.peek() == '*') {
        ++lx.pos;
        continue;
      }
      break;
    }
    if (!saw_number && !saw_factor)
      fail(errc::malformed_term, "malformed term at '" + text.substr(lx.pos) + "'");
    p.add_term(exp, sign * coeff);
    any_term = true;
  }
  if (!any_term) fail(errc::empty_polynomial, "empty polynomial text");
  return p;
}

std::string to_string(const Exponent& a, const std::vector<std::string>& vars) {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < a.vars(); ++i) {
    if (a.e[i] == 0) continue;
    if (!first) os << "*";
    os << vars[i];
    if (a.e[i] > 1) os << "^" << a.e[i];
    first = false;
  }
  if (first) os << "1";
  return os.str();
}

std::string to_string(const Polynomial& p, const std::vector<std::string>& vars) {
  if (p.is_zero()) return "0";
  // Highest monomial first under the default order.
  MonomialOrder order;
  std::vector<const std::pair<const Exponent, double>*> items;
  for (const auto& term : p.terms()) items.push_back(&term);
  std::sort(items.begin(), items.end(),
            [&](auto* a, auto* b) { return order.compare(a->first, b->first) > 0; });

  std::ostringstream os;
  bool first = true;
  for (auto* term : items) {
    const auto& [a, c] = *term;
    double mag = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    const bool constant_term = a.degree() == 0;
    if (constant_term || mag != 1.0) {
      std::ostringstream num;
      num.precision(17);
      num << mag;
      os << num.str();
      if (!constant_term) os << "*";
    }
    if (!constant_term) os << to_string(a, vars);
    first = false;
  }
  return os.str();
}

std::vector<int> PolySystem::half_degrees() const {
  std::vector<int> d;
  for (const auto& h : equalities) d.push_back(half_degree(h));
  for (const auto& h : inequalities) d.push_back(half_degree(h));
  return d;
}

int PolySystem::max_half_degree() const {
  int d = 0;
  for (int dj : half_degrees()) d = std::max(d, dj);
  return d;
}

void PolySystem::validate() const {
  if (equalities.empty()) fail(errc::parse_error, "system has no equality generators");
  if (n < 1) fail(errc::parse_error, "system has no variables");
  auto check = [&](const Polynomial& h) {
    if (h.is_zero()) fail(errc::zero_polynomial, "generator is zero");
    if (h.degree() == 0) fail(errc::parse_error, "generator is a nonzero constant");
    if (h.vars() != n) fail(errc::dimension_mismatch, "generator has wrong variable count");
  };
  for (const auto& h : equalities) check(h);
  for (const auto& h : inequalities) check(h);
}

}  // namespace mrv
