#pragma once

#include <cstdint>
#include <vector>

#include "fcgcg/problem.hpp"
#include "fcgcg/solver.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

enum class StepsizeRule { ExactLineSearch, Harmonic };

// Plain (non-corrective) conditional gradient baseline:
//   u_{k+1} = (1 - s_k) u_k + s_k v_k,
//   v_k = M0 * v_hat if the insertion value is >= 1, else 0.
struct BaselineConfig {
  double M0 = 0.0;  // cap on the gauge of the comparison point, J(0)/beta style
  StepsizeRule stepsize_rule = StepsizeRule::ExactLineSearch;
  int max_iter = 100;
  std::uint64_t rng_seed = 0;
  std::optional<double> reference_objective;

  void validate() const;
};

// Closed-form minimizer over s in [0,1] of
//   s -> F((1-s) y_k + s K v_k) + (1-s) sum(weights) + s M0 [v_k != 0]
// for quadratic losses; zero-curvature directions fall back to endpoint
// comparison.
double exact_linesearch(const SolverState& state, const Atom* candidate, double candidate_gauge,
                        const ProblemOracle& problem);

// One baseline iteration; duplicate atoms are merged by key.
double gcg_step(SolverState& state, const ProblemOracle& problem, const BaselineConfig& config);

SolveResult gcg_solve(const ProblemOracle& problem, const BaselineConfig& config);

}  // namespace fcgcg
