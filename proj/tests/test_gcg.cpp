#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fcgcg/gcg.hpp"
#include "fcgcg/mineffort.hpp"
#include "fcgcg/solver.hpp"

using namespace fcgcg;

namespace {

MinEffortProblem gaussian_effort(std::uint64_t seed) {
  EffortInstance inst;
  inst.K = make_effort_operator(10, 6, EffortOperator::Gaussian, seed);
  inst.cell_measure = Vector::Ones(6);
  inst.alpha = 1.0;
  inst.y_d = inst.K * (Vector(6) << 2.0, -2.0, 2.0, 2.0, -2.0, 1.0).finished();
  return MinEffortProblem(std::move(inst));
}

// Objective of the convex-combination step as a function of s, evaluated
// directly from problem calls; the line search must match its grid minimum.
double combo_objective(const SolverState& state, const Atom* cand, double cand_gauge,
                       const ProblemOracle& p, double s) {
  Vector y = (1.0 - s) * state.y;
  double gauge = (1.0 - s) * state.iterate.total_weight();
  if (cand) {
    y += s * cand_gauge * cand->forward_image;
    gauge += s * cand_gauge;
  }
  return p.loss_eval(y) + gauge;
}

}  // namespace

TEST_CASE("exact line search matches a dense grid scan") {
  auto p = gaussian_effort(31);
  BaselineConfig bc;
  bc.M0 = 12.0;
  bc.max_iter = 3;
  SolverState state;
  state.y = Vector::Zero(p.observation_dim());
  for (int k = 0; k < 3; ++k) gcg_step(state, p, bc);

  DualHandle d = p.dual(state.y);
  auto [atom, value] = p.insert(d);
  const Atom* cand = value >= 1.0 ? &atom : nullptr;
  const double s_star = exact_linesearch(state, cand, bc.M0, p);
  REQUIRE(s_star >= 0.0);
  REQUIRE(s_star <= 1.0);
  const double f_star = combo_objective(state, cand, bc.M0, p, s_star);
  for (int i = 0; i <= 1000; ++i) {
    const double s = i / 1000.0;
    CHECK(f_star <= combo_objective(state, cand, bc.M0, p, s) + 1e-10);
  }
}

TEST_CASE("line search shrinks toward zero when the dual is exhausted") {
  // With no candidate the comparison point is 0 and the search contracts the
  // iterate; the quadratic model makes this exact.
  auto p = gaussian_effort(7);
  BaselineConfig bc;
  bc.M0 = 10.0;
  bc.max_iter = 1;
  SolverState state;
  state.y = Vector::Zero(p.observation_dim());
  gcg_step(state, p, bc);
  const double s_star = exact_linesearch(state, nullptr, bc.M0, p);
  const double f_star = combo_objective(state, nullptr, bc.M0, p, s_star);
  for (int i = 0; i <= 1000; ++i)
    CHECK(f_star <= combo_objective(state, nullptr, bc.M0, p, i / 1000.0) + 1e-10);
}

TEST_CASE("baseline iterations never increase the objective with line search") {
  auto p = gaussian_effort(11);
  BaselineConfig bc;
  bc.M0 = 15.0;
  bc.stepsize_rule = StepsizeRule::ExactLineSearch;
  bc.max_iter = 60;
  auto res = gcg_solve(p, bc);
  REQUIRE(res.records.size() >= 2);
  for (size_t i = 1; i < res.records.size(); ++i)
    CHECK(res.records[i].objective <= res.records[i - 1].objective + 1e-10);
}

TEST_CASE("harmonic stepsizes also converge, more slowly") {
  auto p = gaussian_effort(11);
  BaselineConfig ls = {15.0, StepsizeRule::ExactLineSearch, 60};
  BaselineConfig hm = {15.0, StepsizeRule::Harmonic, 60};
  auto res_ls = gcg_solve(p, ls);
  auto res_hm = gcg_solve(p, hm);
  // Both descend from J(0); the line-search variant is at least as good.
  CHECK(res_ls.records.back().objective <= res_hm.records.back().objective + 1e-9);
  CHECK(res_hm.records.back().objective < res_hm.records.front().objective);
}

TEST_CASE("baseline merges duplicate atoms by key") {
  auto p = gaussian_effort(11);
  BaselineConfig bc;
  bc.M0 = 15.0;
  bc.max_iter = 80;
  auto res = gcg_solve(p, bc);
  // Only 2^6 sign patterns exist; repeats must not grow the support.
  CHECK(res.iterate.size() <= 64);
  for (size_t i = 0; i < res.iterate.atoms.size(); ++i)
    for (size_t j = i + 1; j < res.iterate.atoms.size(); ++j)
      CHECK(res.iterate.atoms[i].key != res.iterate.atoms[j].key);
}

TEST_CASE("baseline plateaus above the fully corrective optimum") {
  auto p = gaussian_effort(19);
  SolverConfig fc;
  fc.max_iter = 60;
  auto res_fc = solve(p, fc);
  const double j_star = objective(res_fc.iterate, p);
  BaselineConfig bc;
  bc.M0 = 20.0;
  bc.max_iter = 25;
  auto res_gcg = gcg_solve(p, bc);
  CHECK(res_gcg.records.back().objective >= j_star - 1e-12);
}

TEST_CASE("baseline config validation") {
  BaselineConfig bc;
  bc.M0 = -1.0;
  CHECK_THROWS(bc.validate());
  bc.M0 = 1.0;
  bc.max_iter = 0;
  CHECK_THROWS(bc.validate());
}
