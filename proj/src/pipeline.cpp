#include "mrv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace mrv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

PolySystem parse_system(std::istream& in, const std::string& origin) {
  PolySystem sys;
  std::string line;
  int lineno = 0;
  bool have_vars = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
    try {
      if (line.rfind("vars:", 0) == 0) {
        std::istringstream names(line.substr(5));
        std::string name;
        while (names >> name) sys.var_names.push_back(name);
        if (sys.var_names.empty()) fail(errc::parse_error, "no variable names given");
        sys.n = static_cast<int>(sys.var_names.size());
        have_vars = true;
      } else if (line.rfind("eq:", 0) == 0) {
        if (!have_vars) fail(errc::parse_error, "'eq:' before 'vars:' line");
        sys.equalities.push_back(parse_polynomial(line.substr(3), sys.var_names));
      } else if (line.rfind("ineq:", 0) == 0) {
        if (!have_vars) fail(errc::parse_error, "'ineq:' before 'vars:' line");
        sys.inequalities.push_back(parse_polynomial(line.substr(5), sys.var_names));
      } else {
        fail(errc::parse_error, "unrecognized line");
      }
    } catch (const error& e) {
      fail(errc::parse_error, where() + e.what());
    }
  }
  if (!have_vars) fail(errc::parse_error, origin + ": missing 'vars:' line");
  if (sys.equalities.empty()) fail(errc::parse_error, origin + ": no 'eq:' generators");
  sys.validate();
  return sys;
}

PolySystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::parse_error, "cannot open '" + path + "'");
  return parse_system(in, path);
}

namespace {

Mat leading_block(const Mat& m, int dim) {
  Mat sub(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) sub(i, j) = m(i, j);
  return sub;
}

bool columns_independent_in(const Mat& m, const MomentIndexMap& idx,
                            const std::vector<Exponent>& t, const Tolerances& tol) {
  Mat sub(m.rows(), static_cast<int>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    const int col = idx.index(t[j]);
    for (int i = 0; i < m.rows(); ++i) sub(i, static_cast<int>(j)) = m(i, col);
  }
  const SvdResult dec = svd(sub);
  return numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio) ==
         static_cast<int>(t.size());
}

MomentSequence truncate_sequence(const MomentSequence& y, int s) {
  MomentSequence z(y.n, s);
  MomentIndexMap from(y.n, 2 * y.t);
  MomentIndexMap to(y.n, 2 * s);
  for (int i = 0; i < to.size(); ++i) z.values[i] = y.values[from.index(to.monomial(i))];
  return z;
}

// Standard monomials for the requested ordering, via the greedy sieve.  For a
// graded ordering the scan stays inside T_{n,s-1}; for lex the moment
// sequence is flat-extended until the sieve output stabilizes.
QuotientBasis sieve_standard_basis(const RunConfig& config, const Mat& oracle_matrix,
                                   int oracle_degree, int n, int s, int rank_r,
                                   const MomentSequence* y_for_extension) {
  const Tolerances& tol = config.tol;
  MomentIndexMap oracle_idx(n, oracle_degree);
  auto oracle = [&](const std::vector<Exponent>& t) {
    return columns_independent_in(oracle_matrix, oracle_idx, t, tol);
  };

  if (config.ordering.kind != OrderKind::Lex) {
    std::vector<Exponent> b = greedy_sieve(oracle, config.ordering, n, s - 1);
    if (static_cast<int>(b.size()) != rank_r)
      fail(errc::basis_incomplete, "sieve basis size differs from quotient dimension");
    return basis_from_monomials(std::move(b), n, s - 1, BasisKind::StandardMonomials);
  }

  // Non-graded ordering: extend flatly and iterate until B_k = B_{k+1}.
  if (!y_for_extension)
    fail(errc::basis_incomplete, "lex sieve needs a flat moment sequence to extend");
  MomentSequence z = truncate_sequence(*y_for_extension, s);
  std::vector<Exponent> prev;
  bool have_prev = false;
  for (int k = std::max(1, s - 1); k <= s + 5; ++k) {
    while (z.t < k) z = flat_extend(z, z.t, tol.svd_zero, tol.gap_ratio);
    const Mat mk = assemble_moment_matrix(z, k);
    MomentIndexMap idx_k(n, k);
    auto oracle_k = [&](const std::vector<Exponent>& t) {
      return columns_independent_in(mk, idx_k, t, tol);
    };
    std::vector<Exponent> b = greedy_sieve(oracle_k, config.ordering, n, k);
    if (have_prev && b == prev) {
      if (static_cast<int>(b.size()) != rank_r)
        fail(errc::basis_incomplete, "stabilized sieve basis size differs from quotient dimension");
      return basis_from_monomials(std::move(b), n, k, BasisKind::StandardMonomials);
    }
    prev = std::move(b);
    have_prev = true;
  }
  fail(errc::basis_incomplete, "sieve did not stabilize within the extension cap");
}

struct Candidate {
  std::vector<std::vector<cplx>> solutions;
  double accuracy = 0.0;
  double comm_error = 0.0;
  ExtractionStatus status = ExtractionStatus::SupersetReturned;
  QuotientBasis basis;
  std::vector<BorderPolynomial> border;
  std::string route_name;
  int t = 0;
  int s = 0;
};

const char* status_name(RunReport::Status s) {
  switch (s) {
    case RunReport::Status::Solved: return "solved";
    case RunReport::Status::EmptyVariety: return "empty_variety";
    case RunReport::Status::OrderExhausted: return "order_exhausted";
    case RunReport::Status::NumericalFailure: return "numerical_failure";
  }
  return "numerical_failure";
}

const char* kind_name(BasisKind k) {
  switch (k) {
    case BasisKind::SvdPolynomial: return "svd";
    case BasisKind::GreedyMonomial: return "monomial";
    case BasisKind::StandardMonomials: return "standard_monomials";
  }
  return "monomial";
}

}  // namespace

RunReport run(const RunConfig& config, const PolySystem& system) {
  system.validate();
  RunReport report;
  report.mode = config.mode;
  report.n = system.n;
  report.var_names = system.var_names;

  const int d = system.max_half_degree();
  const int t0 = config.order > 0 ? config.order : std::max(d, 1);
  const int tmax = config.order > 0 ? config.order : (config.max_order > 0 ? config.max_order : d + 6);
  if (t0 < d) fail(errc::order_too_small, "relaxation order below max half-degree d");

  const Tolerances& tol = config.tol;
  const RankTolerances rtol{tol.svd_zero, tol.gap_ratio};
  bool any_solve = false;
  std::optional<Candidate> best_superset;

  for (int t = t0; t <= tmax; ++t) {
    double cur_cap = config.trace_cap;
    OrderRecord rec;
    for (int cap_try = 0; cap_try < 2; ++cap_try) {
      rec = OrderRecord{};
      rec.t = t;

      SdpProblem prob = config.mode == RunMode::Real ? build_problem(system, t)
                                                     : build_full_complex_problem(system, t);
      SolveOptions sopts;
      sopts.trace_cap = cur_cap;
      sopts.log = config.log;
      SdpOutcome out;
      try {
        out = solve_feasible_max_rank(prob, sopts);
      } catch (const error& e) {
        rec.note = std::string("sdp: ") + e.what();
        break;
      }
      if (out.status == SdpStatus::Infeasible) {
        report.orders.push_back(rec);
        report.status = RunReport::Status::EmptyVariety;
        report.certificate = out.certificate;
        report.message = "the moment relaxation is infeasible: the variety is empty";
        return report;
      }
      if (out.status == SdpStatus::NumericalFailure) {
        rec.note = "sdp: numerical failure";
        break;
      }
      any_solve = true;

      // Rank analysis and flatness certification.
      int s = 0;
      FlatCondition cond = FlatCondition::None;
      Mat extraction_matrix;  // M_s (real) or pruned M^C_s (complex)
      MomentSequence y_real;
      if (config.mode == RunMode::Real) {
        y_real = MomentSequence(system.n, t);
        y_real.values = out.y;
        const Mat mt = assemble_moment_matrix(y_real, t);
        std::vector<int> dims;
        for (int k = 0; k <= t; ++k) dims.push_back(binomial(system.n + k, system.n));
        rec.ranks = nested_ranks(mt, dims, rtol);
        std::tie(s, cond) = certify_condition(rec.ranks, d, t);
        extraction_matrix = leading_block(mt, binomial(system.n + s, system.n));
      } else {
        const ComplexMomentSequence seq = complex_sequence_from(out.y, system.n, t);
        const Mat full = full_complex_matrix(seq, t);
        const Mat pruned = pruned_matrix(seq, t);
        std::vector<int> full_dims, pruned_dims;
        for (int k = 0; k <= t; ++k) {
          full_dims.push_back(binomial(2 * system.n + k, 2 * system.n));
          pruned_dims.push_back(binomial(system.n + k, system.n));
        }
        rec.full_ranks = nested_ranks(full, full_dims, rtol);
        rec.ranks = nested_ranks(pruned, pruned_dims, rtol);
        std::tie(s, cond) = certify_complex_condition(rec.full_ranks, rec.ranks, d, t);
        extraction_matrix = leading_block(pruned, binomial(system.n + s, system.n));
      }
      rec.condition = cond;
      rec.s = s;
      if (cond == FlatCondition::None) {
        rec.note = "no flat condition at this order";
        break;
      }

      const int dim_prev = binomial(system.n + s - 1, system.n);
      const Mat m_prev = leading_block(extraction_matrix, dim_prev);

      std::vector<BasisMethod> routes;
      switch (config.basis) {
        case BasisMethod::Auto: routes = {BasisMethod::Monomial, BasisMethod::Svd}; break;
        case BasisMethod::Monomial: routes = {BasisMethod::Monomial}; break;
        case BasisMethod::Svd: routes = {BasisMethod::Svd}; break;
        case BasisMethod::Sieve: routes = {BasisMethod::Sieve}; break;
      }

      bool solved = false;
      for (BasisMethod route : routes) {
        RouteRecord& rr =
            route == BasisMethod::Svd ? rec.svd_route : rec.monomial_route;
        rr.attempted = true;
        try {
          QuotientBasis basis;
          if (route == BasisMethod::Svd) {
            basis = svd_basis(m_prev, system.n, s - 1, rtol);
          } else if (route == BasisMethod::Monomial) {
            basis = greedy_monomial_basis(m_prev, system.n, s - 1, rtol);
          } else {
            const SvdResult dec = svd(m_prev);
            const int r = numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio);
            basis = sieve_standard_basis(config, extraction_matrix, s, system.n, s, r,
                                         config.mode == RunMode::Real ? &y_real : nullptr);
          }
          if (cond == FlatCondition::PrebasisOnly && basis.kind != BasisKind::SvdPolynomial &&
              !prebasis_rank_ok(extraction_matrix, system.n, s, basis, rtol)) {
            rr.note = "border prebasis rank test failed";
            continue;
          }
          MultiplicationSystem ms =
              multiplication_matrices(extraction_matrix, system.n, s, basis, rtol);
          rr.comm_error = ms.commutativity_error;
          std::vector<std::vector<cplx>> w = extract_roots(ms, config.seed, tol.comm);
          rr.extracted = true;
          FilterResult filter =
              verify_and_filter(w, system, tol.accept, config.mode == RunMode::Real, cond);
          rr.accuracy = filter.accuracy;
          rr.points_kept = static_cast<int>(filter.kept.size());

          Candidate cand;
          cand.solutions = filter.kept;
          cand.accuracy = filter.accuracy;
          cand.comm_error = ms.commutativity_error;
          cand.status = filter.status;
          cand.basis = basis;
          cand.route_name = route == BasisMethod::Svd      ? "svd"
                            : route == BasisMethod::Sieve  ? "sieve"
                                                           : "monomial";
          cand.t = t;
          cand.s = s;
          if (basis.kind != BasisKind::SvdPolynomial && basis.order_ideal)
            cand.border = border_basis(ms);

          if (filter.status == ExtractionStatus::RadicalCertified) {
            report.status = RunReport::Status::Solved;
            report.solutions = cand.solutions;
            report.accuracy = cand.accuracy;
            report.comm_error = cand.comm_error;
            report.extraction_status = cand.status;
            report.basis = cand.basis;
            report.border = cand.border;
            rec.selected_basis = cand.route_name;

            if (config.want_groebner) {
              try {
                if (cand.basis.kind == BasisKind::StandardMonomials) {
                  report.groebner = groebner_from_border(cand.border, cand.basis, config.ordering);
                } else if (cond != FlatCondition::PrebasisOnly) {
                  const SvdResult dec = svd(m_prev);
                  const int r =
                      numerical_rank(dec.singular_values, tol.svd_zero, tol.gap_ratio);
                  QuotientBasis std_basis = sieve_standard_basis(
                      config, extraction_matrix, s, system.n, s, r,
                      config.mode == RunMode::Real ? &y_real : nullptr);
                  if (std_basis.monomials == cand.basis.monomials && !cand.border.empty()) {
                    QuotientBasis upgraded = cand.basis;
                    upgraded.kind = BasisKind::StandardMonomials;
                    report.groebner =
                        groebner_from_border(cand.border, upgraded, config.ordering);
                  } else {
                    MultiplicationSystem ms2 = multiplication_matrices(
                        extraction_matrix, system.n, s, std_basis, rtol);
                    if (ms2.commutativity_error <= tol.comm && std_basis.order_ideal) {
                      std::vector<BorderPolynomial> border2 = border_basis(ms2);
                      report.groebner =
                          groebner_from_border(border2, std_basis, config.ordering);
                    }
                  }
                }
              } catch (const error&) {
                // Groebner output is best-effort; the border basis stands alone.
              }
            }
            solved = true;
            break;
          }
          best_superset = cand;
          rr.note = "superset returned: " + std::to_string(filter.dropped) + " point(s) dropped";
        } catch (const error& e) {
          rr.note = e.what();
        }
      }

      if (solved) {
        report.orders.push_back(rec);
        return report;
      }
      // Retry once with a larger cap when the solver pressed against it.
      const double used_cap =
          cur_cap > 0 ? cur_cap : 1e3 * static_cast<double>(prob.blocks[0].dim);
      if (cap_try == 0 && out.cap_slack_ratio < 1e-3) {
        cur_cap = used_cap * 10.0;
        continue;
      }
      break;
    }
    report.orders.push_back(rec);
  }

  if (!any_solve) {
    report.status = RunReport::Status::NumericalFailure;
    report.message = "no relaxation order could be solved";
    return report;
  }
  report.status = RunReport::Status::OrderExhausted;
  report.message = "no order admitted a certified extraction";
  if (best_superset) {
    report.solutions = best_superset->solutions;
    report.accuracy = best_superset->accuracy;
    report.comm_error = best_superset->comm_error;
    report.extraction_status = best_superset->status;
    report.basis = best_superset->basis;
    report.border = best_superset->border;
  }
  return report;
}

namespace {

std::string route_cell(const RouteRecord& mon, const RouteRecord& svd, int s,
                       auto field_of, bool as_order) {
  auto cell = [&](const RouteRecord& r) -> std::string {
    if (!r.attempted || !r.extracted) return "---";
    std::ostringstream os;
    if (as_order) {
      os << s << "(" << s << ")";
    } else {
      os << std::scientific << std::setprecision(4) << field_of(r);
    }
    return os.str();
  };
  return cell(mon) + "/" + cell(svd);
}

nlohmann::json poly_to_json(const BorderPolynomial& g) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [a, c] : g.poly.terms()) {
    if (a == g.marked) continue;
    terms.push_back({{"exponent", a.e}, {"coeff", c}});
  }
  return {{"marked", g.marked.e}, {"terms", terms}};
}

}  // namespace

std::string render_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::json j;
    j["status"] = status_name(report.status);
    j["mode"] = report.mode == RunMode::Real ? "real" : "complex";
    nlohmann::json orders = nlohmann::json::array();
    for (const OrderRecord& rec : report.orders) {
      const RouteRecord& sel = rec.selected_basis == "svd" ? rec.svd_route : rec.monomial_route;
      nlohmann::json o;
      o["t"] = rec.t;
      o["ranks"] = rec.ranks;
      o["condition"] = to_string(rec.condition);
      o["s"] = rec.s;
      if (sel.extracted) {
        o["comm_error"] = sel.comm_error;
        o["accuracy"] = sel.accuracy;
      } else {
        o["comm_error"] = nullptr;
        o["accuracy"] = nullptr;
      }
      orders.push_back(std::move(o));
    }
    j["orders"] = std::move(orders);

    nlohmann::json solutions = nlohmann::json::array();
    for (const auto& point : report.solutions) {
      nlohmann::json coords = nlohmann::json::array();
      for (const cplx& v : point) coords.push_back({v.real(), v.imag()});
      solutions.push_back(std::move(coords));
    }
    j["solutions"] = std::move(solutions);

    nlohmann::json border = nlohmann::json::array();
    for (const BorderPolynomial& g : report.border) border.push_back(poly_to_json(g));
    j["border_basis"] = std::move(border);
    nlohmann::json groebner = nlohmann::json::array();
    for (const BorderPolynomial& g : report.groebner) groebner.push_back(poly_to_json(g));
    j["groebner_basis"] = std::move(groebner);

    nlohmann::json basis;
    basis["kind"] = kind_name(report.basis.kind);
    nlohmann::json elements = nlohmann::json::array();
    if (report.basis.kind == BasisKind::SvdPolynomial) {
      for (int k = 0; k < report.basis.coefficients.cols(); ++k) {
        nlohmann::json col = nlohmann::json::array();
        for (int i = 0; i < report.basis.coefficients.rows(); ++i)
          col.push_back(report.basis.coefficients(i, k));
        elements.push_back(std::move(col));
      }
    } else {
      for (const Exponent& b : report.basis.monomials) elements.push_back(b.e);
    }
    basis["elements"] = std::move(elements);
    j["basis"] = std::move(basis);
    return j.dump(2) + "\n";
  }

  std::ostringstream os;
  os << "status: " << status_name(report.status) << "\n";
  if (report.certificate) {
    if (report.certificate->linear_inconsistency) {
      os << "infeasibility certificate: localizing equalities are inconsistent (residual "
         << std::scientific << std::setprecision(4) << -report.certificate->lambda_star
         << ")\n";
    } else {
      os << "infeasibility certificate: auxiliary optimum " << std::scientific
         << std::setprecision(4) << report.certificate->lambda_star << " (gap bound "
         << report.certificate->gap_bound << ")\n";
    }
  }
  if (!report.orders.empty()) {
    os << "\norder | rank sequence | extract. order | accuracy | comm. error\n";
    os << "      |               |    MON/SVD     | MON/SVD  | MON/SVD\n";
    for (const OrderRecord& rec : report.orders) {
      std::ostringstream ranks;
      for (std::size_t i = 0; i < rec.ranks.size(); ++i)
        ranks << (i ? " " : "") << rec.ranks[i];
      if (!rec.full_ranks.empty()) {
        ranks << "  (";
        for (std::size_t i = 0; i < rec.full_ranks.size(); ++i)
          ranks << (i ? " " : "") << rec.full_ranks[i];
        ranks << ")";
      }
      os << rec.t << " | " << ranks.str() << " | "
         << route_cell(rec.monomial_route, rec.svd_route, rec.s,
                       [](const RouteRecord& r) { return r.comm_error; }, true)
         << " | "
         << route_cell(rec.monomial_route, rec.svd_route, rec.s,
                       [](const RouteRecord& r) { return r.accuracy; }, false)
         << " | "
         << route_cell(rec.monomial_route, rec.svd_route, rec.s,
                       [](const RouteRecord& r) { return r.comm_error; }, false)
         << "\n";
      if (!rec.note.empty()) os << "      note: " << rec.note << "\n";
    }
  }
  if (!report.solutions.empty()) {
    os << "\nextracted solutions (" << report.solutions.size() << ", "
       << (report.extraction_status == ExtractionStatus::RadicalCertified ? "radical certified"
                                                                          : "superset")
       << ", accuracy " << std::scientific << std::setprecision(4) << report.accuracy << "):\n";
    for (const auto& point : report.solutions) {
      os << "  (";
      for (std::size_t i = 0; i < point.size(); ++i) {
        if (i) os << ", ";
        os << std::defaultfloat << std::setprecision(6) << point[i].real();
        if (std::abs(point[i].imag()) > 0) os << std::showpos << point[i].imag() << "i"
                                              << std::noshowpos;
      }
      os << ")\n";
    }
    if (report.basis.kind == BasisKind::SvdPolynomial) {
      os << "basis: " << report.basis.r << " orthonormal polynomials (svd)\n";
    } else {
      os << "basis: {";
      for (std::size_t i = 0; i < report.basis.monomials.size(); ++i)
        os << (i ? ", " : "") << to_string(report.basis.monomials[i], report.var_names);
      os << "}\n";
    }
    if (!report.border.empty()) {
      os << "border basis:\n";
      for (const BorderPolynomial& g : report.border)
        os << "  " << to_string(g.poly, report.var_names) << "   [marked "
           << to_string(g.marked, report.var_names) << "]\n";
    }
    if (!report.groebner.empty()) {
      os << "reduced groebner basis:\n";
      for (const BorderPolynomial& g : report.groebner)
        os << "  " << to_string(g.poly, report.var_names) << "\n";
    }
  }
  if (!report.message.empty()) os << "\n" << report.message << "\n";
  return os.str();
}

int exit_code(const RunReport& report) {
  switch (report.status) {
    case RunReport::Status::Solved: return 0;
    case RunReport::Status::EmptyVariety: return 1;
    case RunReport::Status::OrderExhausted: return 2;
    case RunReport::Status::NumericalFailure: return 4;
  }
  return 4;
}

}  // namespace mrv
