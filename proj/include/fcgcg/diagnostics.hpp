#pragma once

#include <optional>
#include <vector>

#include "fcgcg/problem.hpp"
#include "fcgcg/solver.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

// Discrete measure mu = sum_i mass_i delta_{atom_i} associated with an
// iterate; total_mass is its measure-space norm.
struct MeasureView {
  std::vector<Atom> support;
  std::vector<double> masses;
  double total_mass = 0.0;

  static MeasureView from_iterate(const ActiveIterate& it);
  // j(mu) = F(K I(mu)) + ||mu||; coincides with J(I(mu)) for distinct atoms.
  double lifted_objective(const ProblemOracle& problem) const;
};

struct FirstOrderReport {
  double insertion_value = 0.0;
  double pairing_slack = 0.0;  // |<p,u> - sum(weights)| / (1 + sum(weights))
  bool pass = false;
};

struct PinningReport {
  double max_deviation = 0.0;
  bool pass = false;
};

struct DominanceReport {
  double max_gap = 0.0;       // max_k r_J(u_k) - r_j(mu_k)
  double max_abs_gap = 0.0;   // equality branch: max_k |r_J - r_j|
  bool pass = false;
  bool equality = false;
};

struct RateFit {
  double zeta_hat = 1.0;
  int window_start = 0;
  int window_end = 0;
  double r_squared = 0.0;
};

// First-order optimality at a candidate solution: insertion value <= 1 + tol
// and <p, u> = sum(weights) within relative tol.
FirstOrderReport verify_first_order(const ActiveIterate& iterate, const ProblemOracle& problem,
                                    double tol);

// |<p, u_i> - 1| <= slack over weight-carrying atoms; zero-weight atoms only
// need <p, u_i> <= 1 + slack.
PinningReport verify_active_pinning(const DualHandle& dual, const ActiveIterate& iterate,
                                    const ProblemOracle& problem, double slack);

// r_J(u_k) <= r_j(mu_k) up to 1e-12 slack; with distinct atoms equality is
// expected and reported.
DominanceReport verify_residual_dominance(const std::vector<double>& residual_u,
                                          const std::vector<double>& residual_mu);

bool verify_monotone(const std::vector<double>& objectives, double tol);

// Least-squares fit of log r vs k on the tail window. Points at or below
// noise_floor are dropped; at least 3 usable points are required.
RateFit fit_linear_rate(const std::vector<double>& residuals, double tail_fraction,
                        double noise_floor);

// c_hat = max_k (k+1) r_k, the empirical constant of the sublinear bound.
double sublinear_bound_check(const std::vector<double>& residuals);

// Noise floor used by the shipped experiments: 1e3 * eps * (1 + J*).
double rate_noise_floor(double reference_objective);

}  // namespace fcgcg
