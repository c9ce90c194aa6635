#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fcgcg/problem.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

// Finite-dimensional coefficient problem
//   min_{lambda >= 0}  F(sum_i lambda_i g_i) + sum_i lambda_i
// with g_i the forward images of the current active atoms.
struct CoefficientProblem {
  Matrix columns;  // m x N, column i = g_i
  std::function<double(const Vector&)> loss_eval;
  std::function<Vector(const Vector&)> loss_grad;
  std::optional<QuadraticLoss> quadratic;

  int n_cols() const { return static_cast<int>(columns.cols()); }

  static CoefficientProblem from_iterate(const ActiveIterate& it, const ProblemOracle& p);
};

struct KktReport {
  double residual = 0.0;
  std::vector<bool> active_mask;
  int inner_iters = 0;
  bool rank_deficient = false;
  // Rounding floor of the KKT gradient evaluation at the returned point: no
  // iterate representable in doubles can certify a smaller residual. The
  // accepted tolerance is max(requested, floor).
  double floor = 0.0;
};

// Max KKT violation of lambda: |grad_i + 1| on lambda_i > 0 and
// max(0, -(grad_i + 1)) on lambda_i = 0, where grad = columns^T gradF(y).
double kkt_residual(const Vector& lambda, const CoefficientProblem& cp);

// Solve the coefficient problem to KKT residual <= tol, warm-started from
// lambda_init. Quadratic losses take an exact active-set (NNLS-style) path;
// general smooth losses use accelerated projected gradient with restart.
// Throws BudgetExceeded if the inner budget is exhausted first.
std::pair<Vector, KktReport> solve_weights(const CoefficientProblem& cp,
                                           const Vector& lambda_init, double tol);

// Test oracle: exact global minimizer for quadratic F and N <= 12 by
// enumerating active sets and solving the reduced normal equations with the
// +1 linear term. Flags rank deficiency instead of throwing.
std::pair<Vector, KktReport> brute_force_qp(const CoefficientProblem& cp);

}  // namespace fcgcg
