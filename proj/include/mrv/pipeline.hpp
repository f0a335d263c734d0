#pragma once

// Front-end pipeline: system files, the order-increasing solve loop, and
// report rendering (run-history tables or JSON).

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mrv/complexcase.hpp"
#include "mrv/extract.hpp"
#include "mrv/sdp.hpp"

namespace mrv {

enum class RunMode { Real, Complex };
enum class BasisMethod { Auto, Svd, Monomial, Sieve };  // Auto: monomial, then svd fallback
enum class ReportFormat { Table, Json };

struct Tolerances {
  double svd_zero = 1e-8;
  double gap_ratio = 1e-3;
  double comm = 1e-2;
  double accept = 1e-4;
};

struct RunConfig {
  RunMode mode = RunMode::Real;
  int order = 0;      // > 0: solve exactly this relaxation order
  int max_order = 0;  // > 0: cap for auto mode (default d + 6)
  BasisMethod basis = BasisMethod::Auto;
  MonomialOrder ordering;  // for the sieve route and Groebner output
  Tolerances tol;
  double trace_cap = 0.0;  // <= 0: solver default
  std::uint64_t seed = 0;
  bool want_groebner = true;
  std::ostream* log = nullptr;
};

struct RouteRecord {
  bool attempted = false;
  bool extracted = false;
  double comm_error = 0.0;
  double accuracy = 0.0;
  int points_kept = 0;
  std::string note;  // failure reason when extraction did not complete
};

struct OrderRecord {
  int t = 0;
  std::vector<int> ranks;         // real mode: M_s ranks; complex mode: pruned ranks
  std::vector<int> full_ranks;    // complex mode: full-matrix ranks
  FlatCondition condition = FlatCondition::None;
  int s = 0;
  RouteRecord monomial_route;
  RouteRecord svd_route;
  std::string selected_basis;  // route that produced the final result, if any
  std::string note;
};

struct RunReport {
  enum class Status { Solved, EmptyVariety, OrderExhausted, NumericalFailure };
  Status status = Status::NumericalFailure;
  RunMode mode = RunMode::Real;
  int n = 0;
  std::vector<std::string> var_names;
  std::vector<OrderRecord> orders;

  // Final extraction result (status == Solved, or best superset when exhausted).
  std::vector<std::vector<cplx>> solutions;
  double accuracy = 0.0;
  double comm_error = 0.0;
  ExtractionStatus extraction_status = ExtractionStatus::SupersetReturned;
  QuotientBasis basis;
  std::vector<BorderPolynomial> border;
  std::vector<BorderPolynomial> groebner;

  std::optional<InfeasibilityCertificate> certificate;  // EmptyVariety
  std::string message;
};

PolySystem load_system(const std::string& path);
PolySystem parse_system(std::istream& in, const std::string& origin);

RunReport run(const RunConfig& config, const PolySystem& system);

std::string render_report(const RunReport& report, ReportFormat format);

// 0 solved, 1 empty variety, 2 order exhausted, 4 numerical failure.
int exit_code(const RunReport& report);

}  // namespace mrv
