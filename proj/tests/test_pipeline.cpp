#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mrv/pipeline.hpp"

using namespace mrv;

namespace {

const std::string kCorpus = MRV_CORPUS_DIR;

RunConfig quiet_config() {
  RunConfig config;
  config.seed = 0;
  return config;
}

bool has_root_near(const RunReport& report, const std::vector<double>& v, double tol) {
  for (const auto& point : report.solutions) {
    if (point.size() != v.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(point[i] - cplx(v[i], 0.0)) > tol) ok = false;
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("load_system reads the corpus format") {
  PolySystem gauss = load_system(kCorpus + "/gauss.sys");
  CHECK(gauss.n == 4);
  CHECK(gauss.equalities.size() == 4);
  CHECK(gauss.inequalities.size() == 8);
  CHECK(gauss.max_half_degree() == 2);

  PolySystem katsura = load_system(kCorpus + "/katsura5.sys");
  CHECK(katsura.n == 6);
  CHECK(katsura.equalities.size() == 6);
  CHECK(katsura.inequalities.empty());
  CHECK(katsura.max_half_degree() == 1);
}

TEST_CASE("parse_system rejects malformed files with a line number") {
  std::istringstream missing_vars("eq: x1^2-1\n");
  CHECK_THROWS_AS(parse_system(missing_vars, "f"), error);

  std::istringstream bad_poly("vars: x1\n\neq: x1^2 ++ 1\n");
  try {
    parse_system(bad_poly, "f");
    FAIL("expected parse error");
  } catch (const error& e) {
    CHECK(e.code() == errc::parse_error);
    CHECK(std::string(e.what()).find("f:3") != std::string::npos);
  }

  std::istringstream junk("vars: x1\nbogus: 3\n");
  CHECK_THROWS_AS(parse_system(junk, "f"), error);
}

TEST_CASE("x(x^2+1): solved with the flat-d certificate and root zero") {
  PolySystem sys = load_system(kCorpus + "/ex1_1_n1.sys");
  RunConfig config = quiet_config();
  config.order = 3;
  RunReport report = run(config, sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  const OrderRecord& rec = report.orders.back();
  REQUIRE(rec.ranks.size() == 4);
  CHECK(rec.ranks[0] == 1);
  CHECK(rec.ranks[1] == 1);
  CHECK(rec.ranks[2] == 1);
  CHECK(rec.condition == FlatCondition::FlatD);
  CHECK(rec.s == 2);
  REQUIRE(report.solutions.size() == 1);
  CHECK(std::abs(report.solutions[0][0]) <= 1e-7);
  CHECK(report.border.size() == 1);
  CHECK(exit_code(report) == 0);
}

TEST_CASE("x1^2 + x2^2: origin recovered at order one") {
  PolySystem sys = load_system(kCorpus + "/ex1_2.sys");
  RunReport report = run(quiet_config(), sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  CHECK(report.orders.back().t == 1);
  REQUIRE(report.solutions.size() == 1);
  CHECK(has_root_near(report, {0.0, 0.0}, 1e-6));
}

TEST_CASE("x^2 + 1: empty variety with certificate") {
  PolySystem sys = load_system(kCorpus + "/empty.sys");
  RunReport report = run(quiet_config(), sys);
  CHECK(report.status == RunReport::Status::EmptyVariety);
  REQUIRE(report.certificate.has_value());
  CHECK(report.certificate->lambda_star < -1e-6);
  CHECK(exit_code(report) == 1);
}

TEST_CASE("cox3: terminates by order four with both roots and the border basis") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunConfig config = quiet_config();
  RunReport report = run(config, sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  CHECK(report.orders.back().t <= 4);
  REQUIRE(report.solutions.size() == 2);
  CHECK(has_root_near(report, {0.0, 0.0}, 1e-5));
  CHECK(has_root_near(report, {1.0, 2.0}, 1e-5));
  CHECK(report.border.size() == 3);
  REQUIRE(report.basis.monomials.size() == 2);
  CHECK(report.basis.monomials[0] == Exponent({0, 0}));
  CHECK(report.basis.monomials[1] == Exponent({1, 0}));
  // Ranks at t=4 reproduce the known sequence head.
  const OrderRecord& rec = report.orders.back();
  CHECK(rec.ranks[0] == 1);
  CHECK(rec.ranks[1] == 2);
  CHECK(rec.ranks[2] == 2);
  CHECK(rec.ranks[3] == 2);
}

TEST_CASE("cox3 with grevlex x2 > x1: groebner basis is the two-element set") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunConfig config = quiet_config();
  config.ordering = MonomialOrder{OrderKind::GradedRevLex, {1, 0}};
  RunReport report = run(config, sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  REQUIRE(report.groebner.size() == 2);
  // x2 - 2 x1 and x1^2 - x1 up to 1e-4.
  bool found_linear = false, found_quad = false;
  for (const BorderPolynomial& g : report.groebner) {
    if (g.marked == Exponent({0, 1})) {
      found_linear = std::abs(g.poly.coefficient(Exponent({1, 0})) + 2.0) <= 1e-4;
    }
    if (g.marked == Exponent({2, 0})) {
      found_quad = std::abs(g.poly.coefficient(Exponent({1, 0})) + 1.0) <= 1e-4;
    }
  }
  CHECK(found_linear);
  CHECK(found_quad);
}

TEST_CASE("lex ordering groebner uses the flat extension ladder") {
  std::istringstream text("vars: x1 x2\neq: x1^2-x1\neq: x2-2*x1\n");
  PolySystem sys = parse_system(text, "inline");
  RunConfig config = quiet_config();
  config.ordering = MonomialOrder::lex();  // x1 > x2
  // At t = 3 the one-step rank condition holds, which the non-graded ladder
  // needs; the prebasis-only certificate at t = 2 does not support it.
  config.order = 3;
  RunReport report = run(config, sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  REQUIRE(!report.groebner.empty());
  // B_lex = {1, x2}: generators x1 - x2/2 and x2^2 - 2 x2.
  bool found_x1 = false, found_x2sq = false;
  for (const BorderPolynomial& g : report.groebner) {
    if (g.marked == Exponent({1, 0}))
      found_x1 = std::abs(g.poly.coefficient(Exponent({0, 1})) + 0.5) <= 1e-3;
    if (g.marked == Exponent({0, 2}))
      found_x2sq = std::abs(g.poly.coefficient(Exponent({0, 1})) + 2.0) <= 1e-3;
  }
  CHECK(found_x1);
  CHECK(found_x2sq);
}

TEST_CASE("gauss: auto mode certifies and the roots satisfy the box") {
  PolySystem sys = load_system(kCorpus + "/gauss.sys");
  RunReport report = run(quiet_config(), sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  REQUIRE(report.solutions.size() == 2);
  const double a = 1.0 / std::sqrt(3.0);
  CHECK(has_root_near(report, {1.0, 1.0, -a, a}, 1e-5));
  CHECK(has_root_near(report, {1.0, 1.0, a, -a}, 1e-5));
}

TEST_CASE("change of variables: the transformed system still certifies") {
  // h_i = l_i (l_i^2 + 1) for l = A x with A nonsingular; the only real root
  // stays at the origin but the generators are no longer a Groebner basis.
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-0.4, 0.4);
  Polynomial l1(2), l2(2);
  l1.add_term(Exponent({1, 0}), 1.0 + dist(rng));
  l1.add_term(Exponent({0, 1}), dist(rng));
  l2.add_term(Exponent({1, 0}), dist(rng));
  l2.add_term(Exponent({0, 1}), 1.0 + dist(rng));
  PolySystem sys;
  sys.n = 2;
  sys.var_names = {"x1", "x2"};
  sys.equalities.push_back(l1 * l1 * l1 + l1);
  sys.equalities.push_back(l2 * l2 * l2 + l2);

  RunReport report = run(quiet_config(), sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  REQUIRE(report.solutions.size() == 1);
  CHECK(has_root_near(report, {0.0, 0.0}, 1e-5));
  const OrderRecord& rec = report.orders.back();
  CHECK((rec.condition == FlatCondition::FlatD ||
         rec.condition == FlatCondition::FlatOneHighOrder));
}

TEST_CASE("json report is schema-complete and deterministic") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunConfig config = quiet_config();
  RunReport report = run(config, sys);
  const std::string a = render_report(report, ReportFormat::Json);
  RunReport report2 = run(config, sys);
  const std::string b = render_report(report2, ReportFormat::Json);
  CHECK(a == b);

  nlohmann::json j = nlohmann::json::parse(a);
  for (const char* key :
       {"status", "mode", "orders", "solutions", "border_basis", "groebner_basis", "basis"})
    CHECK(j.contains(key));
  CHECK(j["status"] == "solved");
  CHECK(j["mode"] == "real");
  REQUIRE(j["orders"].is_array());
  for (const auto& o : j["orders"]) {
    CHECK(o.contains("t"));
    CHECK(o.contains("ranks"));
    CHECK(o.contains("condition"));
    CHECK(o.contains("s"));
    CHECK(o.contains("comm_error"));
    CHECK(o.contains("accuracy"));
  }
  CHECK(j["solutions"].size() == 2);
  for (const auto& point : j["solutions"])
    for (const auto& coord : point) CHECK(coord.size() == 2);
  CHECK(j["basis"]["kind"] == "monomial");
  CHECK(j["basis"]["elements"].size() == 2);
  CHECK(j["border_basis"].size() == 3);
  for (const auto& g : j["border_basis"]) {
    CHECK(g.contains("marked"));
    CHECK(g.contains("terms"));
  }
}

TEST_CASE("table report carries the run-history columns") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunReport report = run(quiet_config(), sys);
  const std::string table = render_report(report, ReportFormat::Table);
  CHECK(table.find("order | rank sequence | extract. order | accuracy | comm. error") !=
        std::string::npos);
  CHECK(table.find("1 2 2 2") != std::string::npos);
  CHECK(table.find("status: solved") != std::string::npos);
}

TEST_CASE("cox3 solution: flat segment extends without rank growth") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  SdpProblem prob = build_problem(sys, 4);
  SdpOutcome out = solve_feasible_max_rank(prob);
  REQUIRE(out.status == SdpStatus::InteriorPoint);
  MomentSequence y(2, 4);
  y.values = out.y;
  // Truncate to the flat order s = 2 and extend: the rank stays 2.
  MomentSequence z(2, 2);
  MomentIndexMap from(2, 8), to(2, 4);
  for (int i = 0; i < to.size(); ++i) z.values[i] = y.values[from.index(to.monomial(i))];
  MomentSequence ext = flat_extend(z, 2);
  Mat m3 = assemble_moment_matrix(ext, 3);
  CHECK(numerical_rank(svd(m3).singular_values) == 2);
  CHECK(eig_symmetric(m3).values.back() >= -1e-7 * std::max(1.0, m3.max_abs()));
}

TEST_CASE("cox3: refinement from a rank-deficient start reaches rank M_1 = 2") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  SdpProblem prob = build_problem(sys, 4);
  const double w = 1.0;
  MomentSequence start = moments_of_measure({{1.0, 2.0}}, std::span<const double>(&w, 1), 2, 4);
  std::vector<double> refined = refine_max_rank(prob, start.values);
  MomentSequence y(2, 4);
  y.values = refined;
  CHECK(numerical_rank(svd(assemble_moment_matrix(y, 1)).singular_values) == 2);
}

TEST_CASE("border polynomials lie in the kernel of M_s") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  SdpProblem prob = build_problem(sys, 4);
  SdpOutcome out = solve_feasible_max_rank(prob);
  REQUIRE(out.status == SdpStatus::InteriorPoint);
  MomentSequence y(2, 4);
  y.values = out.y;
  const int s = 2;
  Mat ms = assemble_moment_matrix(y, s);
  QuotientBasis basis = greedy_monomial_basis(assemble_moment_matrix(y, s - 1), 2, s - 1);
  MultiplicationSystem mult = multiplication_matrices(ms, 2, s, basis);
  MomentIndexMap idx(2, s);
  for (const BorderPolynomial& g : border_basis(mult)) {
    std::vector<double> vec(idx.size(), 0.0);
    for (const auto& [a, c] : g.poly.terms()) vec[idx.index(a)] = c;
    double norm = 0.0;
    for (double v : matvec(ms, vec)) norm += v * v;
    CHECK(std::sqrt(norm) <= 1e-5 * std::max(1.0, ms.max_abs()));
  }
}

TEST_CASE("fixed order below d is rejected") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunConfig config = quiet_config();
  config.order = 2;  // d = 3
  CHECK_THROWS_AS(run(config, sys), error);
}

TEST_CASE("cox3 at order five keeps the flat segment") {
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunConfig config = quiet_config();
  config.order = 5;
  RunReport report = run(config, sys);
  REQUIRE(report.status == RunReport::Status::Solved);
  const OrderRecord& rec = report.orders.back();
  REQUIRE(rec.ranks.size() == 6);
  CHECK(rec.ranks[0] == 1);
  for (int s = 1; s <= 4; ++s) CHECK(rec.ranks[s] == 2);
  CHECK(rec.ranks[5] >= 7);
  CHECK(has_root_near(report, {0.0, 0.0}, 1e-5));
  CHECK(has_root_near(report, {1.0, 2.0}, 1e-5));
}

TEST_CASE("random systems with constructed varieties are recovered") {
  std::mt19937 rng(515);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);

  // One variable: h = (x - r1)(x - r2)(x^2 + bx + c) with the quadratic
  // factor kept rootless; exactly {r1, r2} must be found.
  for (int trial = 0; trial < 6; ++trial) {
    double r1 = dist(rng), r2 = dist(rng);
    if (std::abs(r1 - r2) < 0.25) continue;
    const double b = dist(rng);
    const double cq = 0.3 + b * b / 4.0 + std::abs(dist(rng));  // discriminant < 0
    Polynomial x = Polynomial::variable(1, 0);
    Polynomial lin1 = x - Polynomial::constant(1, r1);
    Polynomial lin2 = x - Polynomial::constant(1, r2);
    Polynomial quad = x * x + b * x + Polynomial::constant(1, cq);
    PolySystem sys;
    sys.n = 1;
    sys.var_names = {"x1"};
    sys.equalities.push_back(lin1 * lin2 * quad);

    RunReport report = run(quiet_config(), sys);
    REQUIRE(report.status == RunReport::Status::Solved);
    CHECK(report.solutions.size() == 2);
    CHECK(has_root_near(report, {r1}, 1e-5));
    CHECK(has_root_near(report, {r2}, 1e-5));
  }

  // Two variables: h1 = (x1 - a)(x1 - b), h2 = x2 - (c x1 + d); the variety
  // is the two points on the line.
  for (int trial = 0; trial < 6; ++trial) {
    const double a = dist(rng), b = dist(rng), c = dist(rng), d = dist(rng);
    if (std::abs(a - b) < 0.25) continue;
    Polynomial x1 = Polynomial::variable(2, 0);
    Polynomial x2 = Polynomial::variable(2, 1);
    PolySystem sys;
    sys.n = 2;
    sys.var_names = {"x1", "x2"};
    sys.equalities.push_back((x1 - Polynomial::constant(2, a)) *
                             (x1 - Polynomial::constant(2, b)));
    sys.equalities.push_back(x2 - c * x1 - Polynomial::constant(2, d));

    RunReport report = run(quiet_config(), sys);
    REQUIRE(report.status == RunReport::Status::Solved);
    CHECK(report.solutions.size() == 2);
    CHECK(has_root_near(report, {a, c * a + d}, 1e-5));
    CHECK(has_root_near(report, {b, c * b + d}, 1e-5));
  }
}

TEST_CASE("order exhaustion reports the per-order history") {
  // cox3 capped at t = 3 cannot certify.
  PolySystem sys = load_system(kCorpus + "/cox3.sys");
  RunConfig config = quiet_config();
  config.max_order = 3;
  RunReport report = run(config, sys);
  CHECK(report.status == RunReport::Status::OrderExhausted);
  CHECK(report.orders.size() == 1);
  CHECK(exit_code(report) == 2);
}
