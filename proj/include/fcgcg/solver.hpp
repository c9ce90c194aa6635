#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fcgcg/problem.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

// Mutable per-solve state: current iterate and its cached observation K u.
struct SolverState {
  ActiveIterate iterate;
  Vector y;
  int k = 0;
  // Effective (floor-adjusted) KKT tolerance certified by the most recent
  // coefficient solve; bounds how far active dual values can sit from one.
  double last_tol = 0.0;
};

// Dual pinning |<p_k, u_i> - 1| measured over retained atoms right after a
// subproblem solve (evaluated with the dual of the updated iterate).
struct PinningSample {
  int k = 0;
  double max_deviation = 0.0;
  double tol_used = 0.0;
};

struct SolveResult {
  ActiveIterate iterate;
  std::vector<IterationRecord> records;
  TerminationReason reason = TerminationReason::MaxIter;
  std::vector<PinningSample> pinning;
};

struct StepOutcome {
  std::optional<TerminationReason> terminated;
  IterationRecord record;
  double subproblem_tol_used = 0.0;
  // max_i |<p_k, u_i> - 1| over the atoms held on entry (pins the previous
  // subproblem solve).
  double pinning_deviation = 0.0;
};

// Stopping test: true iff k >= 1 and insertion_value <= 1 + stop_tol.
bool stop_check(double insertion_value, int k, double stop_tol);

// Duplicate-key guard around the active-set extension. Returns the
// (possibly) extended iterate and whether the key was already present; a new
// atom is appended with weight 0.
std::pair<ActiveIterate, bool> merge_or_insert(const ActiveIterate& iter, const Atom& atom);

// J(u) = F(K u) + sum_i weight_i; F(0) for the empty iterate.
double objective(const ActiveIterate& iter, const ProblemOracle& problem);

// One iteration of the fully corrective scheme: dual, insertion, stop test,
// coefficient subproblem, pruning. Mutates `state` in place.
StepOutcome step(const ProblemOracle& problem, SolverState& state, const SolverConfig& config);

// Full driver. Starts from warm_start (distinct atoms, positive weights) or
// from u_0 = 0, and iterates until the stop test fires or the budget is hit.
SolveResult solve(const ProblemOracle& problem, const SolverConfig& config,
                  const std::optional<ActiveIterate>& warm_start = std::nullopt);

}  // namespace fcgcg
