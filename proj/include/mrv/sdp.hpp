#pragma once

// The moment feasibility SDP: assembly from a polynomial system, a barrier
// path-following solver that returns a relative-interior (maximum-rank) point
// or an infeasibility certificate, and the kernel-based rank refinement loop.
//
// The feasibility program has a constant objective, so a maximum-rank point is
// found by following the central path of the strictly feasible lifted program
//     maximize lambda  s.t.  B_k(y) >= lambda*I,  E y = b,  tr(M_t(y)) <= cap.
// Its optimal value is 0 exactly when the moment spectrahedron is nonempty,
// and the path converges to the analytic center of the optimal face, i.e. a
// point of maximum rank.  A clearly negative optimum certifies emptiness.

#include <optional>
#include <ostream>
#include <vector>

#include "mrv/linalg.hpp"
#include "mrv/moment.hpp"
#include "mrv/poly.hpp"

namespace mrv {

struct SdpBlockTerm {
  int row, col;  // row <= col
  int var;
  double coeff;
};

struct SdpBlock {
  int dim = 0;
  std::vector<SdpBlockTerm> terms;
};

struct SdpLinearRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
};

struct SdpProblem {
  int num_vars = 0;
  int n = 0;  // ambient variables of the polynomial system
  int t = 0;  // relaxation order
  std::vector<SdpBlock> blocks;          // blocks[0] is the main moment block
  std::vector<SdpLinearRow> equalities;  // localizing equalities plus y_0 = 1
  std::vector<double> trace_coeffs;      // tr(main block) as a linear form in y
};

// Main PSD block of order C(n+t,n), one equality row group per equality
// generator, one PSD block of order C(n+t-d_j,n) per inequality generator.
SdpProblem build_problem(const PolySystem& system, int t);

struct SolveOptions {
  double trace_cap = 0.0;  // <= 0 means 1e3 * (main block dim)
  double mu_min = 1e-11;
  double mu_shrink = 10.0;  // path step: division factor per centering stage
  double center_tol = 1e-8;
  double final_tol = 1e-10;
  double infeasible_tol = 1e-6;
  int max_newton = 1000;
  int max_center_iterations = 60;  // Newton iterations per centering stage
  std::ostream* log = nullptr;
};

enum class SdpStatus { InteriorPoint, Infeasible, NumericalFailure };

struct InfeasibilityCertificate {
  double lambda_star = 0.0;  // optimum of the auxiliary program, < -infeasible_tol
  double gap_bound = 0.0;    // mu * barrier parameter: |true optimum - lambda_star| bound
  bool linear_inconsistency = false;
};

struct SdpOutcome {
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<double> y;
  double lambda = 0.0;  // final value of the lifted slack variable
  double min_block_eigenvalue = 0.0;
  double equality_residual = 0.0;
  double barrier_value = 0.0;
  double cap_slack_ratio = 1.0;  // (cap - trace)/cap at the solution
  int newton_iterations = 0;
  double mu_final = 0.0;
  double newton_decrement = 0.0;  // at the final iterate; small means well centered
  double dual_balance = 0.0;  // mu*tr(sum (B-lambda I)^{-1}) / lambda weight; 1 on the path
  std::optional<InfeasibilityCertificate> certificate;
};

SdpOutcome solve_feasible_max_rank(const SdpProblem& p, const SolveOptions& opts = {});

// Max-rank backstop: compute a kernel basis u_1..u_p of the main block at
// y_hat, maximize <sum u_i u_i^T, M(y)> over the feasible set, average, and
// repeat until the objective stays at zero.
std::vector<double> refine_max_rank(const SdpProblem& p, std::vector<double> y_hat,
                                    const SolveOptions& opts = {},
                                    double svd_zero_tol = 1e-8, double gap_ratio = 1e-3);

// Evaluates one PSD block of the problem at a y vector.
Mat evaluate_block(const SdpBlock& block, std::span<const double> y);

}  // namespace mrv
