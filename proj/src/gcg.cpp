#include "fcgcg/gcg.hpp"

#include <chrono>
#include <cmath>

#include "fcgcg/errors.hpp"

namespace fcgcg {

void BaselineConfig::validate() const {
  if (!(M0 > 0.0)) throw ConfigInvalid("M0 must be positive");
  if (max_iter < 1) throw ConfigInvalid("max_iter must be >= 1");
}

double exact_linesearch(const SolverState& state, const Atom* candidate, double candidate_gauge,
                        const ProblemOracle& problem) {
  const int m = problem.observation_dim();
  const auto ql = problem.quadratic_loss();
  if (!ql) throw ConfigInvalid("exact_linesearch requires a quadratic loss");

  const Vector target_dir =
      candidate ? Vector(candidate_gauge * candidate->forward_image) : Vector(Vector::Zero(m));
  const Vector delta = target_dir - state.y;
  const double gauge_now = state.iterate.total_weight();
  const double gauge_slope = (candidate ? candidate_gauge : 0.0) - gauge_now;

  // phi(s) = a s^2 + b s + const on [0,1].
  const double a = 0.5 * delta.cwiseProduct(delta).dot(ql->weights);
  const double b = delta.cwiseProduct(state.y - ql->target).dot(ql->weights) + gauge_slope;

  if (a <= 0.0) {
    // Degenerate direction: objective is linear (or flat); endpoint compare,
    // preferring s = 0 on ties.
    return b < 0.0 ? 1.0 : 0.0;
  }
  return std::clamp(-b / (2.0 * a), 0.0, 1.0);
}

double gcg_step(SolverState& state, const ProblemOracle& problem, const BaselineConfig& config) {
  DualHandle dual = problem.dual(state.y);
  auto [atom, value] = problem.insert(dual);

  const bool shrink = value < 1.0;  // ||dual|| below the gauge threshold: v_k = 0
  const Atom* cand = shrink ? nullptr : &atom;
  double s;
  if (config.stepsize_rule == StepsizeRule::ExactLineSearch) {
    s = exact_linesearch(state, cand, config.M0, problem);
  } else {
    s = 2.0 / (state.k + 2.0);
  }

  for (double& w : state.iterate.weights) w *= (1.0 - s);
  if (!shrink && s > 0.0) {
    bool merged = false;
    for (int i = 0; i < state.iterate.size(); ++i) {
      if (state.iterate.atoms[i].key == atom.key) {
        state.iterate.weights[i] += s * config.M0;
        merged = true;
        break;
      }
    }
    if (!merged) {
      state.iterate.atoms.push_back(atom);
      state.iterate.weights.push_back(s * config.M0);
    }
  }
  state.y = state.iterate.forward(problem.observation_dim());
  state.k += 1;
  return value;
}

SolveResult gcg_solve(const ProblemOracle& problem, const BaselineConfig& config) {
  config.validate();
  SolverState state;
  state.y = Vector::Zero(problem.observation_dim());

  SolveResult res;
  for (int k = 0; k < config.max_iter; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const double obj = problem.loss_eval(state.y) + state.iterate.total_weight();
    if (!std::isfinite(obj)) throw NonFiniteObjective("baseline objective is not finite");

    IterationRecord rec;
    rec.k = k;
    rec.objective = obj;
    if (config.reference_objective) rec.residual = obj - *config.reference_objective;
    rec.active_size = state.iterate.size();
    rec.insertion_value = gcg_step(state, problem, config);
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    res.records.push_back(rec);
  }
  res.reason = TerminationReason::MaxIter;
  res.iterate = state.iterate;
  return res;
}

}  // namespace fcgcg
