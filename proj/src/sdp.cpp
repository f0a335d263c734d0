#include "mrv/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace mrv {

SdpProblem build_problem(const PolySystem& system, int t) {
  system.validate();
  const int d = system.max_half_degree();
  if (t < d) fail(errc::order_too_small, "build_problem: t < d");
  const int n = system.n;
  MomentIndexMap vars(n, 2 * t);

  SdpProblem p;
  p.num_vars = vars.size();
  p.n = n;
  p.t = t;

  MomentIndexMap rows_t(n, t);
  SdpBlock main;
  main.dim = rows_t.size();
  for (int i = 0; i < main.dim; ++i)
    for (int j = i; j < main.dim; ++j)
      main.terms.push_back({i, j, vars.index(rows_t.monomial(i) + rows_t.monomial(j)), 1.0});
  p.blocks.push_back(std::move(main));

  p.trace_coeffs.assign(p.num_vars, 0.0);
  for (int i = 0; i < rows_t.size(); ++i)
    p.trace_coeffs[vars.index(rows_t.monomial(i) + rows_t.monomial(i))] += 1.0;

  SdpLinearRow y0;
  y0.coeffs.push_back({vars.index(Exponent::zero(n)), 1.0});
  y0.rhs = 1.0;
  p.equalities.push_back(std::move(y0));

  for (const Polynomial& h : system.equalities) {
    LinearConstraintSystem sys = localizing_equalities(h, t);
    for (std::size_t r = 0; r < sys.rows.size(); ++r) {
      SdpLinearRow row;
      row.rhs = sys.rhs[r];
      for (const auto& [a, c] : sys.rows[r]) row.coeffs.push_back({vars.index(a), c});
      p.equalities.push_back(std::move(row));
    }
  }

  for (const Polynomial& h : system.inequalities) {
    const int dj = half_degree(h);
    MomentIndexMap rows_s(n, t - dj);
    SdpBlock blk;
    blk.dim = rows_s.size();
    for (int i = 0; i < blk.dim; ++i)
      for (int j = i; j < blk.dim; ++j) {
        const Exponent g = rows_s.monomial(i) + rows_s.monomial(j);
        for (const auto& [delta, c] : h.terms())
          blk.terms.push_back({i, j, vars.index(g + delta), c});
      }
    p.blocks.push_back(std::move(blk));
  }
  return p;
}

Mat evaluate_block(const SdpBlock& block, std::span<const double> y) {
  Mat b(block.dim, block.dim);
  for (const SdpBlockTerm& term : block.terms) {
    b(term.row, term.col) += term.coeff * y[term.var];
    if (term.row != term.col) b(term.col, term.row) += term.coeff * y[term.var];
  }
  return b;
}

namespace {

// x = (z in R^p, lambda); y(x) = y_p + F z; shifted blocks B_k(y(x)) - lambda*I.
struct Lifted {
  const SdpProblem* prob = nullptr;
  std::vector<double> y_part;
  Mat f;  // num_vars x p
  int p = 0;
  double cap = 0.0;
  double eq_residual = 0.0;  // constant along the affine parametrization
  double trace_part = 0.0;
  std::vector<double> trace_f;       // F^T trace_coeffs
  std::vector<Mat> base;             // B_k(y_p)
  std::vector<std::vector<Mat>> g;   // g[k][a]

  std::vector<double> to_y(std::span<const double> x) const {
    std::vector<double> y = y_part;
    for (int i = 0; i < prob->num_vars; ++i) {
      double s = 0.0;
      for (int a = 0; a < p; ++a) s += f(i, a) * x[a];
      y[i] += s;
    }
    return y;
  }

  double slack(std::span<const double> x) const {
    double s = cap - trace_part;
    for (int a = 0; a < p; ++a) s -= trace_f[a] * x[a];
    return s;
  }

  Mat block_at(int k, std::span<const double> x) const {
    Mat b = base[k];
    for (int a = 0; a < p; ++a) {
      const double za = x[a];
      if (za == 0.0) continue;
      const Mat& ga = g[k][a];
      for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) b(i, j) += za * ga(i, j);
    }
    const double lambda = x[p];
    for (int i = 0; i < b.rows(); ++i) b(i, i) -= lambda;
    return b;
  }
};

Lifted build_lifted(const SdpProblem& prob, const AffineSolution& affine, double cap) {
  Lifted l;
  l.prob = &prob;
  l.y_part = affine.particular;
  l.f = affine.nullspace;
  l.p = l.f.cols();
  l.cap = cap;
  l.eq_residual = affine.residual;
  l.trace_part = 0.0;
  for (int i = 0; i < prob.num_vars; ++i) l.trace_part += prob.trace_coeffs[i] * l.y_part[i];
  l.trace_f.assign(l.p, 0.0);
  for (int a = 0; a < l.p; ++a) {
    double s = 0.0;
    for (int i = 0; i < prob.num_vars; ++i) s += prob.trace_coeffs[i] * l.f(i, a);
    l.trace_f[a] = s;
  }
  for (const SdpBlock& blk : prob.blocks) {
    l.base.push_back(evaluate_block(blk, l.y_part));
    std::vector<Mat> gk(l.p, Mat(blk.dim, blk.dim));
    for (const SdpBlockTerm& term : blk.terms) {
      for (int a = 0; a < l.p; ++a) {
        const double c = term.coeff * l.f(term.var, a);
        if (c == 0.0) continue;
        gk[a](term.row, term.col) += c;
        if (term.row != term.col) gk[a](term.col, term.row) += c;
      }
    }
    l.g.push_back(std::move(gk));
  }
  return l;
}

struct BarrierState {
  std::vector<double> x;  // size p+1
  double phi = 0.0;
  bool feasible = false;
};

// Barrier value at x for objective coefficients c/mu; infeasible -> feasible=false.
BarrierState eval_phi(const Lifted& l, std::span<const double> x, std::span<const double> c,
                      double mu) {
  BarrierState st;
  st.x.assign(x.begin(), x.end());
  const double slack = l.slack(x);
  if (slack <= 0.0) return st;
  double phi = std::log(slack);
  for (std::size_t k = 0; k < l.base.size(); ++k) {
    Cholesky chol;
    if (!chol.factor(l.block_at(static_cast<int>(k), x))) return st;
    phi += chol.log_det();
  }
  for (std::size_t i = 0; i < c.size(); ++i) phi += c[i] * x[i] / mu;
  st.phi = phi;
  st.feasible = true;
  return st;
}

double min_eigenvalue_over_blocks(const Lifted& l, std::span<const double> x, double lambda) {
  double mineig = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < l.base.size(); ++k) {
    Mat b = l.block_at(static_cast<int>(k), x);
    for (int i = 0; i < b.rows(); ++i) b(i, i) += lambda;  // undo the shift
    const SymEigResult eig = eig_symmetric(b);
    if (!eig.values.empty()) mineig = std::min(mineig, eig.values.back());
  }
  return mineig;
}

struct PathResult {
  bool converged = false;
  std::vector<double> x;
  double mu_final = 0.0;
  double barrier_value = 0.0;
  int newton_total = 0;
  // Newton decrement recomputed at the returned iterate with an unridged
  // Hessian solve; infinite when that solve is unavailable.  This is the
  // self-concordance certificate behind the duality-gap bound.
  double final_decrement = 0.0;
  // mu * tr(sum_k (B_k - lambda I)^{-1}) at the final iterate: equals the
  // lambda-objective weight exactly on the central path.
  double dual_balance = 0.0;
};

// Gradient, Hessian and log-det of the barrier-plus-objective at x.
// Returns false when x is outside the cone.
bool assemble_newton(const Lifted& l, std::span<const double> x,
                     const std::vector<double>& c_lin, double mu, std::vector<double>& grad,
                     Mat& hess, double& logdet_sum) {
  const int p = l.p;
  const int dim = p + 1;
  const double slack = l.slack(x);
  if (slack <= 0.0) return false;
  grad.assign(dim, 0.0);
  for (int i = 0; i < dim; ++i) grad[i] = c_lin[i] / mu;
  for (int a = 0; a < p; ++a) grad[a] -= l.trace_f[a] / slack;
  hess = Mat(dim, dim);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) hess(a, b) = -l.trace_f[a] * l.trace_f[b] / (slack * slack);

  logdet_sum = std::log(slack);
  std::vector<Mat> w;
  for (std::size_t k = 0; k < l.base.size(); ++k) {
    Cholesky chol;
    if (!chol.factor(l.block_at(static_cast<int>(k), x))) return false;
    logdet_sum += chol.log_det();
    const Mat linv = chol.inverse_lower();
    const int m = linv.rows();
    // With B = L L^T:  tr(B^{-1}) = |L^{-1}|_F^2,  tr(B^{-2}) = |K|_F^2 and
    // tr(B^{-2} G_a) = <K, W_a>_F for K = L^{-1} L^{-T}, W_a = L^{-1} G_a L^{-T}.
    double tr_s = 0.0;
    for (int j = 0; j < m; ++j)
      for (int r = j; r < m; ++r) tr_s += linv(r, j) * linv(r, j);
    Mat kk(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        const int top = std::min(i, j);
        for (int r = 0; r <= top; ++r) s += linv(i, r) * linv(j, r);
        kk(i, j) = s;
      }
    double tr_s2 = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) tr_s2 += kk(i, j) * kk(i, j);

    w.assign(p, Mat());
    for (int a = 0; a < p; ++a) w[a] = chol.whiten(l.g[k][a]);

    for (int a = 0; a < p; ++a) {
      double tr_w = 0.0;
      for (int i = 0; i < m; ++i) tr_w += w[a](i, i);
      grad[a] += tr_w;
      double kw = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) kw += kk(i, j) * w[a](i, j);
      hess(a, p) += kw;
      hess(p, a) += kw;
    }
    grad[p] -= tr_s;
    hess(p, p) -= tr_s2;
    for (int a = 0; a < p; ++a) {
      const double* wa = w[a].data();
      for (int b = a; b < p; ++b) {
        const double* wb = w[b].data();
        double dot = 0.0;
        const int mm = m * m;
        for (int idx = 0; idx < mm; ++idx) dot += wa[idx] * wb[idx];
        hess(a, b) -= dot;
        if (a != b) hess(b, a) -= dot;
      }
    }
  }
  return true;
}

// Damped-Newton path following for a linear objective over the lifted set.
PathResult follow_path(const Lifted& l, std::vector<double> x0,
                       const std::vector<double>& c_lin, const SolveOptions& opts) {
  const int p = l.p;
  const int dim = p + 1;
  PathResult out;
  std::vector<double> x = std::move(x0);

  double mu = std::max(1.0, std::abs(x[p]));
  const double sigma = std::max(1.5, opts.mu_shrink);
  int total_newton = 0;

  std::vector<double> grad(dim), dir(dim);
  Mat hess(dim, dim);

  bool last_round = false;
  while (true) {
    const double tol = last_round ? opts.final_tol : opts.center_tol;
    int noisy_steps = 0;
    for (int it = 0; it < opts.max_center_iterations; ++it) {
      if (++total_newton > opts.max_newton)
        fail(errc::numerical_failure, "sdp: Newton iteration cap exceeded");

      double logdet_sum = 0.0;
      if (!assemble_newton(l, x, c_lin, mu, grad, hess, logdet_sum))
        fail(errc::numerical_failure, "sdp: iterate left the cone");

      // Ascent direction: (-H) d = grad.
      Mat neg(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) neg(i, j) = -hess(i, j);
      Cholesky hc;
      double ridge = 0.0;
      for (int attempt = 0; attempt < 40 && !hc.factor(neg); ++attempt) {
        ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, neg.max_abs()) : ridge * 10.0;
        for (int i = 0; i < dim; ++i) neg(i, i) += ridge;
      }
      dir.assign(grad.begin(), grad.end());
      hc.solve_in_place(dir);
      double decrement_sq = 0.0;
      for (int i = 0; i < dim; ++i) decrement_sq += grad[i] * dir[i];
      const double decrement = std::sqrt(std::max(0.0, decrement_sq));

      if (opts.log) {
        const double mineig = min_eigenvalue_over_blocks(l, x, x[p]);
        (*opts.log) << "iter " << total_newton << " mu " << std::scientific << std::setprecision(3)
                    << mu << " barrier " << std::setprecision(9) << logdet_sum << " lambda "
                    << x[p] << " mineig " << mineig << " eqres " << l.eq_residual
                    << " decrement " << decrement << "\n";
      }
      if (decrement <= tol) break;

      // Backtracking line search: stay in the cone, then Armijo; when the
      // barrier evaluation is too noisy for Armijo, settle for the best
      // strictly improving trial.
      double phi0 = logdet_sum;
      for (int i = 0; i < dim; ++i) phi0 += c_lin[i] * x[i] / mu;
      double step = 1.0;
      std::vector<double> trial(dim);
      bool accepted = false;
      std::vector<double> best_trial;
      double best_phi = phi0;
      for (int ls = 0; ls < 60; ++ls) {
        for (int i = 0; i < dim; ++i) trial[i] = x[i] + step * dir[i];
        const BarrierState st = eval_phi(l, trial, c_lin, mu);
        if (st.feasible && st.phi >= phi0 + 0.25 * step * decrement_sq) {
          x = trial;
          accepted = true;
          noisy_steps = 0;
          break;
        }
        if (st.feasible && st.phi > best_phi) {
          best_phi = st.phi;
          best_trial = trial;
        }
        step *= 0.5;
      }
      if (!accepted) {
        if (best_trial.empty() || ++noisy_steps >= 3) break;  // noise-limited
        x = std::move(best_trial);
      }
    }

    if (last_round) {
      out.converged = true;
      out.x = x;
      out.mu_final = mu;
      out.newton_total = total_newton;
      // Certification pass at the returned iterate: exact gradient/Hessian,
      // strictly unridged Newton solve, and the dual trace normalization.
      out.final_decrement = std::numeric_limits<double>::infinity();
      out.dual_balance = std::numeric_limits<double>::infinity();
      double logdet_final = 0.0;
      if (assemble_newton(l, x, c_lin, mu, grad, hess, logdet_final)) {
        double sum_tr = 0.0;  // recover tr(sum S_k) from the lambda gradient
        sum_tr = c_lin[p] / mu - grad[p];
        out.dual_balance = mu * sum_tr;
        Mat neg(dim, dim);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) neg(i, j) = -hess(i, j);
        Cholesky hc;
        if (hc.factor(neg)) {
          dir.assign(grad.begin(), grad.end());
          hc.solve_in_place(dir);
          double dsq = 0.0;
          for (int i = 0; i < dim; ++i) dsq += grad[i] * dir[i];
          out.final_decrement = std::sqrt(std::max(0.0, dsq));
        }
      }
      const BarrierState st = eval_phi(l, x, std::vector<double>(dim, 0.0), 1.0);
      out.barrier_value = st.phi;
      return out;
    }
    mu /= sigma;
    if (mu <= opts.mu_min) {
      mu = opts.mu_min;
      last_round = true;
    }
  }
}

struct Assembled {
  Mat e;
  std::vector<double> b;
};

Assembled equality_matrix(const SdpProblem& prob) {
  Assembled out;
  out.e = Mat(static_cast<int>(prob.equalities.size()), prob.num_vars);
  out.b.resize(prob.equalities.size());
  for (std::size_t r = 0; r < prob.equalities.size(); ++r) {
    for (const auto& [v, c] : prob.equalities[r].coeffs) out.e(static_cast<int>(r), v) += c;
    out.b[r] = prob.equalities[r].rhs;
  }
  return out;
}

double equality_residual_inf(const SdpProblem& prob, std::span<const double> y) {
  double res = 0.0;
  for (const SdpLinearRow& row : prob.equalities) {
    double s = -row.rhs;
    for (const auto& [v, c] : row.coeffs) s += c * y[v];
    res = std::max(res, std::abs(s));
  }
  return res;
}

SdpOutcome solve_lifted_objective(const SdpProblem& prob, const std::vector<double>& c_obj,
                                  double lambda_weight, const SolveOptions& opts) {
  SdpOutcome out;
  const double cap =
      opts.trace_cap > 0 ? opts.trace_cap : 1e3 * static_cast<double>(prob.blocks[0].dim);

  const Assembled eq = equality_matrix(prob);
  const AffineSolution affine = solve_affine(eq.e, eq.b);
  if (affine.residual > 1e-7 * (1.0 + std::sqrt(static_cast<double>(eq.b.size())))) {
    out.status = SdpStatus::Infeasible;
    out.certificate = InfeasibilityCertificate{-affine.residual, 0.0, true};
    return out;
  }

  Lifted l = build_lifted(prob, affine, cap);
  const int p = l.p;

  if (l.slack(std::vector<double>(p + 1, 0.0)) <= 0.0)
    fail(errc::numerical_failure, "sdp: trace cap excludes the particular solution");

  // Strictly feasible start: lambda below the smallest block eigenvalue at y_p.
  double min_base = std::numeric_limits<double>::infinity();
  for (const Mat& b : l.base) {
    const SymEigResult eig = eig_symmetric(b);
    if (!eig.values.empty()) min_base = std::min(min_base, eig.values.back());
  }
  std::vector<double> x0(p + 1, 0.0);
  x0[p] = min_base - 1.0 - 0.1 * std::abs(min_base);

  std::vector<double> c_lin(p + 1, 0.0);
  if (!c_obj.empty()) {
    for (int a = 0; a < p; ++a) {
      double s = 0.0;
      for (int i = 0; i < prob.num_vars; ++i) s += l.f(i, a) * c_obj[i];
      c_lin[a] = s;
    }
  }
  c_lin[p] = lambda_weight;

  const PathResult path = follow_path(l, std::move(x0), c_lin, opts);
  out.newton_iterations = path.newton_total;
  out.mu_final = path.mu_final;
  out.newton_decrement = path.final_decrement;
  out.dual_balance = path.dual_balance / lambda_weight;
  out.barrier_value = path.barrier_value;
  out.lambda = path.x[p];
  out.y = l.to_y(path.x);
  out.equality_residual = equality_residual_inf(prob, out.y);
  out.min_block_eigenvalue = min_eigenvalue_over_blocks(l, path.x, path.x[p]);
  const double slack = l.slack(path.x);
  out.cap_slack_ratio = slack / cap;
  out.status = SdpStatus::InteriorPoint;
  return out;
}

}  // namespace

SdpOutcome solve_feasible_max_rank(const SdpProblem& prob, const SolveOptions& opts) {
  SdpOutcome out;
  try {
    out = solve_lifted_objective(prob, {}, 1.0, opts);
  } catch (const error& e) {
    if (e.code() != errc::numerical_failure) throw;
    out.status = SdpStatus::NumericalFailure;
    return out;
  }
  if (out.status == SdpStatus::Infeasible) return out;

  double nu = 1.0;
  for (const SdpBlock& b : prob.blocks) nu += b.dim;

  // A point satisfying the feasibility contract is returned regardless of how
  // far the lifted slack converged: the blocks themselves prove nonemptiness.
  if (out.min_block_eigenvalue >= -1e-9 && out.equality_residual <= 1e-8) {
    out.status = SdpStatus::InteriorPoint;
    return out;
  }
  if (out.lambda < -opts.infeasible_tol) {
    // lambda only upper-bounds the auxiliary optimum through the duality gap
    // of a near-centered iterate, so emptiness is certified only when the
    // unridged Newton decrement at the returned point is genuinely small and
    // the dual trace normalization mu*tr(S) = 1 of the central path holds.
    const double gap = out.mu_final * nu * (1.0 + 2.0 * out.newton_decrement);
    if (out.newton_decrement <= 0.25 && gap <= 0.1 * opts.infeasible_tol &&
        std::abs(out.dual_balance - 1.0) <= 0.2) {
      out.status = SdpStatus::Infeasible;
      out.certificate = InfeasibilityCertificate{out.lambda, gap, false};
      out.y.clear();
      return out;
    }
  }
  out.status = SdpStatus::NumericalFailure;
  return out;
}

std::vector<double> refine_max_rank(const SdpProblem& prob, std::vector<double> y_hat,
                                    const SolveOptions& opts, double svd_zero_tol,
                                    double gap_ratio) {
  const SdpBlock& main = prob.blocks[0];
  // The probe only feeds the averaging step, so a gap around 1e-8 suffices and
  // keeps the Newton systems away from the hard mu -> 0 endgame.
  SolveOptions probe_opts = opts;
  probe_opts.mu_min = std::max(opts.mu_min, 1e-9);
  probe_opts.center_tol = std::max(opts.center_tol, 1e-7);
  probe_opts.final_tol = std::max(opts.final_tol, 1e-8);

  for (int round = 0; round <= main.dim; ++round) {
    const Mat m = evaluate_block(main, y_hat);
    const SvdResult dec = svd(m);
    const int r = numerical_rank(dec.singular_values, svd_zero_tol, gap_ratio);
    if (r == main.dim) break;

    // C = sum of u_i u_i^T over the kernel directions.
    Mat c(main.dim, main.dim);
    for (int k = r; k < main.dim; ++k)
      for (int i = 0; i < main.dim; ++i)
        for (int j = 0; j < main.dim; ++j) c(i, j) += dec.u(i, k) * dec.u(j, k);

    std::vector<double> c_obj(prob.num_vars, 0.0);
    for (const SdpBlockTerm& term : main.terms) {
      const double mult = term.row == term.col ? 1.0 : 2.0;
      c_obj[term.var] += mult * term.coeff * c(term.row, term.col);
    }
    double c_max = 0.0;
    for (double v : c_obj) c_max = std::max(c_max, std::abs(v));
    if (c_max == 0.0) break;
    std::vector<double> c_unit = c_obj;
    for (double& v : c_unit) v /= c_max;

    double c_scale = 0.0;
    for (double v : c_unit) c_scale += std::abs(v);
    SdpOutcome probe;
    double weight = 10.0 * (1.0 + c_scale);
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt, weight *= 100.0) {
      probe = solve_lifted_objective(prob, c_unit, weight, probe_opts);
      if (probe.status != SdpStatus::InteriorPoint) return y_hat;
      // Penalty-level slack is harmless: the midpoint average only needs the
      // probe to be feasible to well below the rank-detection threshold.
      ok = probe.lambda >= -1e-5;
      if (opts.log)
        (*opts.log) << "refine round " << round << " rank " << r << " weight " << weight
                    << " lambda " << probe.lambda << "\n";
    }
    if (!ok) return y_hat;

    double objective = 0.0;
    for (int i = 0; i < prob.num_vars; ++i) objective += c_obj[i] * probe.y[i];
    const double scale = dec.singular_values.empty() ? 1.0 : std::max(1.0, dec.singular_values[0]);
    if (opts.log)
      (*opts.log) << "refine round " << round << " objective " << objective << " scale " << scale
                  << "\n";
    if (objective <= 1e-9 * scale) break;  // y_hat already has maximal rank

    for (int i = 0; i < prob.num_vars; ++i) y_hat[i] = 0.5 * (y_hat[i] + probe.y[i]);
  }
  return y_hat;
}

}  // namespace mrv
