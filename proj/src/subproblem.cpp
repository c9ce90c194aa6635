#include "fcgcg/subproblem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fcgcg/errors.hpp"

namespace fcgcg {

CoefficientProblem CoefficientProblem::from_iterate(const ActiveIterate& it,
                                                    const ProblemOracle& p) {
  CoefficientProblem cp;
  const int m = p.observation_dim();
  cp.columns.resize(m, it.size());
  for (int i = 0; i < it.size(); ++i) cp.columns.col(i) = it.atoms[i].forward_image;
  cp.loss_eval = [&p](const Vector& y) { return p.loss_eval(y); };
  cp.loss_grad = [&p](const Vector& y) { return p.loss_grad(y); };
  cp.quadratic = p.quadratic_loss();
  return cp;
}

double kkt_residual(const Vector& lambda, const CoefficientProblem& cp) {
  const Vector y = cp.columns * lambda;
  const Vector grad = cp.columns.transpose() * cp.loss_grad(y) + Vector::Ones(cp.n_cols());
  double r = 0.0;
  for (int i = 0; i < cp.n_cols(); ++i) {
    if (lambda(i) > 0.0)
      r = std::max(r, std::abs(grad(i)));
    else
      r = std::max(r, std::max(0.0, -grad(i)));
  }
  return r;
}

namespace {

double objective_of(const CoefficientProblem& cp, const Vector& lambda) {
  return cp.loss_eval(cp.columns * lambda) + lambda.sum();
}

// Rounding scale of evaluating grad_i = <g_i, gradF(G lambda)> + 1: sums of
// |terms| bound the cancellation, and perturbing lambda by one ulp moves the
// observation by |G| |lambda| eps, which re-enters through the loss
// curvature (diagonal weights for the quadratic path).
double kkt_floor(const Vector& lambda, const CoefficientProblem& cp) {
  const double eps = std::numeric_limits<double>::epsilon();
  const Vector y_abs = cp.columns.cwiseAbs() * lambda.cwiseAbs();
  Vector grad_abs = cp.loss_grad(cp.columns * lambda).cwiseAbs();
  if (cp.quadratic)
    grad_abs += cp.quadratic->weights.cwiseAbs().cwiseProduct(y_abs);
  else
    grad_abs *= 2.0;
  const Vector per_col = cp.columns.cwiseAbs().transpose() * grad_abs;
  return 16.0 * eps * (per_col.maxCoeff() + 1.0);
}

// Solve Q_PP x = c_P; falls back to a minimum-norm solve when the reduced
// system is singular.
Vector solve_reduced(const Matrix& Q, const Vector& c, const std::vector<int>& P,
                     bool* deficient) {
  const int np = static_cast<int>(P.size());
  Matrix Qpp(np, np);
  Vector cp(np);
  for (int a = 0; a < np; ++a) {
    cp(a) = c(P[a]);
    for (int b = 0; b < np; ++b) Qpp(a, b) = Q(P[a], P[b]);
  }
  Eigen::LDLT<Matrix> ldlt(Qpp);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  bool use_cod = false;
  Vector x = ldlt.solve(cp);
  if (!x.allFinite() || (Qpp * x - cp).norm() > 1e-8 * (1.0 + cp.norm())) {
    cod.compute(Qpp);
    use_cod = true;
    x = cod.solve(cp);
    if (deficient && cod.rank() < np) *deficient = true;
  }
  // Iterative refinement: near-parallel atom columns push the condition
  // number of the reduced normal equations high enough that a single solve
  // leaves a KKT residual orders of magnitude above the rounding floor.
  const double eps = std::numeric_limits<double>::epsilon();
  const double qnorm = Qpp.cwiseAbs().rowwise().sum().maxCoeff();
  for (int sweep = 0; sweep < 6; ++sweep) {
    const Vector r = cp - Qpp * x;
    if (r.cwiseAbs().maxCoeff() <= 4.0 * eps * (qnorm * x.cwiseAbs().maxCoeff() + cp.norm()))
      break;
    const Vector dx = use_cod ? Vector(cod.solve(r)) : Vector(ldlt.solve(r));
    if (!dx.allFinite()) break;
    x += dx;
  }
  return x;
}

// NNLS-style active-set method extended with the unit linear cost:
//   min 1/2 lambda^T Q lambda - c^T lambda,  lambda >= 0,
// with Q = G^T W G and c = G^T W b - 1. Finite termination for PSD Q.
std::pair<Vector, KktReport> active_set_qp(const CoefficientProblem& cp,
                                           const Vector& lambda_init, double tol) {
  const int n = cp.n_cols();
  const auto& ql = *cp.quadratic;
  const Matrix WG = ql.weights.asDiagonal() * cp.columns;
  const Matrix Q = cp.columns.transpose() * WG;
  const Vector c = WG.transpose() * ql.target - Vector::Ones(n);

  Vector lambda = lambda_init.cwiseMax(0.0);
  std::vector<int> P;
  for (int i = 0; i < n; ++i)
    if (lambda(i) > 0.0) P.push_back(i);

  KktReport rep;
  const int budget = std::max(200, 50 * n);
  int pivots = 0;

  while (true) {
    if (!P.empty()) {
      Vector xp = solve_reduced(Q, c, P, &rep.rank_deficient);
      // Inner loop: pull the interpolated point back to the feasible set,
      // dropping coordinates that hit zero.
      while (true) {
        int neg = -1;
        for (int a = 0; a < static_cast<int>(P.size()); ++a)
          if (xp(a) <= 0.0) neg = a;
        if (neg < 0) break;
        double alpha = 1.0;
        for (int a = 0; a < static_cast<int>(P.size()); ++a) {
          if (xp(a) <= 0.0) {
            double la = lambda(P[a]);
            double denom = la - xp(a);
            if (denom > 0.0) alpha = std::min(alpha, la / denom);
          }
        }
        for (int a = 0; a < static_cast<int>(P.size()); ++a)
          lambda(P[a]) += alpha * (xp(a) - lambda(P[a]));
        std::vector<int> keep;
        for (int a = 0; a < static_cast<int>(P.size()); ++a) {
          if (lambda(P[a]) > 1e-14 * (1.0 + lambda.maxCoeff()))
            keep.push_back(P[a]);
          else
            lambda(P[a]) = 0.0;
        }
        P = keep;
        if (++pivots > budget) throw BudgetExceeded("active-set pivot budget exhausted");
        if (P.empty()) break;
        xp = solve_reduced(Q, c, P, &rep.rank_deficient);
      }
      lambda.setZero();
      for (int a = 0; a < static_cast<int>(P.size()); ++a) lambda(P[a]) = xp(a);
    }

    const Vector grad = Q * lambda - c;
    int best = -1;
    double best_val = -std::max(tol, kkt_floor(lambda, cp));
    for (int i = 0; i < n; ++i) {
      bool in_p = std::find(P.begin(), P.end(), i) != P.end();
      if (!in_p && grad(i) < best_val) {
        best_val = grad(i);
        best = i;
      }
    }
    if (best < 0) break;
    P.push_back(best);
    if (++pivots > budget) throw BudgetExceeded("active-set pivot budget exhausted");
  }

  rep.inner_iters = pivots;
  rep.active_mask.assign(n, false);
  for (int i = 0; i < n; ++i) rep.active_mask[i] = lambda(i) > 0.0;
  rep.residual = kkt_residual(lambda, cp);
  return {lambda, rep};
}

// Accelerated projected gradient with function-value restart for general
// smooth losses.
std::pair<Vector, KktReport> apg(const CoefficientProblem& cp, const Vector& lambda_init,
                                 double tol) {
  const int n = cp.n_cols();
  Vector x = lambda_init.cwiseMax(0.0);
  Vector z = x;
  double t = 1.0;
  double L = 1.0;
  double fx = objective_of(cp, x);

  auto grad_at = [&](const Vector& v) -> Vector {
    return cp.columns.transpose() * cp.loss_grad(cp.columns * v) + Vector::Ones(n);
  };

  KktReport rep;
  const int budget = 10000;
  for (int it = 0; it < budget; ++it) {
    Vector g = grad_at(z);
    Vector xn;
    double fz = objective_of(cp, z);
    while (true) {
      xn = (z - g / L).cwiseMax(0.0);
      Vector d = xn - z;
      double fq = fz + g.dot(d) + 0.5 * L * d.squaredNorm();
      if (objective_of(cp, xn) <= fq + 1e-15 * (1.0 + std::abs(fq))) break;
      L *= 2.0;
      if (L > 1e30) throw BudgetExceeded("apg backtracking diverged");
    }
    double fn = objective_of(cp, xn);
    if (fn > fx) {  // function-value restart
      z = x;
      t = 1.0;
      continue;
    }
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = xn + ((t - 1.0) / tn) * (xn - x);
    z = z.cwiseMax(0.0);
    t = tn;
    x = xn;
    fx = fn;
    rep.inner_iters = it + 1;
    double r = kkt_residual(x, cp);
    if (r <= std::max(tol, kkt_floor(x, cp))) {
      rep.residual = r;
      rep.active_mask.assign(n, false);
      for (int i = 0; i < n; ++i) rep.active_mask[i] = x(i) > 0.0;
      return {x, rep};
    }
  }
  throw BudgetExceeded("apg iteration budget exhausted");
}

}  // namespace

std::pair<Vector, KktReport> solve_weights(const CoefficientProblem& cp,
                                           const Vector& lambda_init, double tol) {
  if (lambda_init.size() != cp.n_cols())
    throw std::invalid_argument("lambda_init dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!cp.columns.allFinite()) throw NonFiniteObjective("non-finite column in subproblem");

  auto [lambda, rep] =
      cp.quadratic ? active_set_qp(cp, lambda_init, tol) : apg(cp, lambda_init, tol);
  // Monotone fallback: never return a worse point than the warm start.
  if (objective_of(cp, lambda) > objective_of(cp, lambda_init.cwiseMax(0.0))) {
    lambda = lambda_init.cwiseMax(0.0);
    rep.residual = kkt_residual(lambda, cp);
  }
  rep.floor = kkt_floor(lambda, cp);
  if (rep.residual > std::max(tol, rep.floor)) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "kkt residual %.3e above tolerance %.3e (floor %.3e)",
                  rep.residual, tol, rep.floor);
    throw BudgetExceeded(msg);
  }
  return {lambda, rep};
}

std::pair<Vector, KktReport> brute_force_qp(const CoefficientProblem& cp) {
  const int n = cp.n_cols();
  if (!cp.quadratic) throw std::invalid_argument("brute_force_qp requires a quadratic loss");
  if (n > 12) throw std::invalid_argument("brute_force_qp limited to N <= 12");

  const auto& ql = *cp.quadratic;
  const Matrix WG = ql.weights.asDiagonal() * cp.columns;
  const Matrix Q = cp.columns.transpose() * WG;
  const Vector c = WG.transpose() * ql.target - Vector::Ones(n);

  Vector best = Vector::Zero(n);
  double best_obj = objective_of(cp, best);
  std::vector<std::pair<double, bool>> visited;  // (objective, deficient)

  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) S.push_back(i);
    bool deficient = false;
    Vector xs = solve_reduced(Q, c, S, &deficient);
    if (!xs.allFinite()) continue;
    bool feasible = true;
    for (int a = 0; a < static_cast<int>(S.size()); ++a)
      if (xs(a) < -1e-11) feasible = false;
    if (!feasible) continue;
    Vector lam = Vector::Zero(n);
    for (int a = 0; a < static_cast<int>(S.size()); ++a) lam(S[a]) = std::max(0.0, xs(a));
    double obj = objective_of(cp, lam);
    visited.emplace_back(obj, deficient);
    if (obj < best_obj - 1e-15 * (1.0 + std::abs(best_obj))) {
      best_obj = obj;
      best = lam;
    }
  }

  KktReport rep;
  // Flag rank deficiency when a singular reduced system ties the optimum
  // (duplicate or dependent columns make the minimizer non-unique).
  for (const auto& [obj, deficient] : visited)
    if (deficient && obj <= best_obj + 1e-11 * (1.0 + std::abs(best_obj)))
      rep.rank_deficient = true;
  rep.active_mask.assign(n, false);
  for (int i = 0; i < n; ++i) rep.active_mask[i] = best(i) > 0.0;
  rep.residual = kkt_residual(best, cp);
  return {best, rep};
}

}  // namespace fcgcg
