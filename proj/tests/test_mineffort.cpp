#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fcgcg/errors.hpp"
#include "fcgcg/mineffort.hpp"
#include "fcgcg/solver.hpp"

using namespace fcgcg;

namespace {

EffortInstance twocell_instance() {
  EffortInstance inst;
  inst.K = Matrix::Identity(2, 2);
  inst.cell_measure = Vector::Ones(2);
  inst.alpha = 1.0;
  inst.y_d = (Vector(2) << 2.0, -2.0).finished();
  return inst;
}

}  // namespace

TEST_CASE("instance validation rejects malformed inputs") {
  auto inst = twocell_instance();
  inst.alpha = -1.0;
  CHECK_THROWS_AS(MinEffortProblem(std::move(inst)), ConfigInvalid);
  inst = twocell_instance();
  inst.cell_measure = Vector::Ones(3);
  CHECK_THROWS_AS(MinEffortProblem(std::move(inst)), ConfigInvalid);
  inst = twocell_instance();
  inst.cell_measure(1) = 0.0;
  CHECK_THROWS_AS(MinEffortProblem(std::move(inst)), ConfigInvalid);
}

TEST_CASE("operator generators are seeded and well formed") {
  CHECK_THROWS_AS(make_effort_operator(3, 4, EffortOperator::Identity, 0), ConfigInvalid);
  auto k1 = make_effort_operator(6, 4, EffortOperator::Gaussian, 5);
  auto k2 = make_effort_operator(6, 4, EffortOperator::Gaussian, 5);
  CHECK((k1 - k2).cwiseAbs().maxCoeff() == 0.0);
  auto s = make_effort_operator(5, 12, EffortOperator::Smoothing, 0);
  for (int r = 0; r < 5; ++r) CHECK(s.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("insertion picks the dual sign pattern and its weighted l1 value") {
  MinEffortProblem p(twocell_instance());
  DualHandle d = p.dual(Vector::Zero(2));  // p = K^T y_d = (2, -2)
  CHECK(d.vec(0) == doctest::Approx(2.0));
  CHECK(d.vec(1) == doctest::Approx(-2.0));
  auto [atom, value] = p.insert(d);
  CHECK(atom.key == "+-");
  CHECK(value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(p.dual_value(d, atom) == doctest::Approx(value).epsilon(1e-14));
}

TEST_CASE("nonuniform cell measures enter the duality pairing") {
  EffortInstance inst = twocell_instance();
  inst.cell_measure = (Vector(2) << 2.0, 3.0).finished();
  MinEffortProblem p(std::move(inst));
  DualHandle d = p.dual(Vector::Zero(2));
  // Cell representative divides by the measure; the pairing multiplies it
  // back, so insertion value = sum_i |K^T r|_i / alpha is measure-consistent.
  CHECK(d.vec(0) == doctest::Approx(1.0));
  CHECK(d.vec(1) == doctest::Approx(-2.0 / 3.0));
  auto [atom, value] = p.insert(d);
  CHECK(value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(p.dual_value(d, atom) == doctest::Approx(value).epsilon(1e-14));
}

TEST_CASE("two-cell closed form: u = (1.5, -1.5), J* = 1.75") {
  MinEffortProblem p(twocell_instance());
  SolverConfig cfg;
  cfg.max_iter = 20;
  auto res = solve(p, cfg);
  CHECK(res.reason == TerminationReason::Optimal);
  Vector u = p.cell_values(res.iterate);
  CHECK(u(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(u(1) == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(objective(res.iterate, p) == doctest::Approx(1.75).epsilon(1e-12));

  const Vector pbar = p.dual(res.iterate.forward(2)).vec;
  auto bin = p.binariness_check(u, pbar, 1e-3);
  CHECK(bin.pass);
  CHECK(bin.lambda_hat == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(bin.worst_relative_gap <= 1e-10);
}

TEST_CASE("binariness check flags off-level and wrong-sign cells") {
  MinEffortProblem p(twocell_instance());
  Vector pbar = (Vector(2) << 0.5, -0.5).finished();
  auto bad_level = p.binariness_check((Vector(2) << 1.5, -1.0).finished(), pbar, 1e-3);
  CHECK_FALSE(bad_level.pass);
  CHECK(bad_level.worst_relative_gap == doctest::Approx(0.5 / 1.5).epsilon(1e-12));
  auto bad_sign = p.binariness_check((Vector(2) << 1.5, 1.5).finished(), pbar, 1e-3);
  CHECK_FALSE(bad_sign.pass);
  // Cells under the dual threshold are exempt.
  auto exempt = p.binariness_check((Vector(2) << 1.5, 0.2).finished(),
                                   (Vector(2) << 0.5, 1e-4).finished(), 1e-3);
  CHECK(exempt.pass);
}

TEST_CASE("smallvalue measure sums cell measures under the threshold") {
  EffortInstance inst = twocell_instance();
  inst.cell_measure = (Vector(2) << 2.0, 3.0).finished();
  MinEffortProblem p(std::move(inst));
  Vector pbar = (Vector(2) << 0.5, -0.05).finished();
  CHECK(p.smallvalue_measure(pbar, 0.1) == doctest::Approx(3.0));
  CHECK(p.smallvalue_measure(pbar, 0.01) == doctest::Approx(0.0));
  CHECK(p.smallvalue_measure(pbar, 1.0) == doctest::Approx(5.0));
}

TEST_CASE("cell values accumulate weighted sign patterns") {
  EffortInstance inst = twocell_instance();
  inst.alpha = 2.0;
  MinEffortProblem p(std::move(inst));
  ActiveIterate it;
  it.atoms = {p.make_atom((Vector(2) << 1.0, -1.0).finished()),
              p.make_atom((Vector(2) << 1.0, 1.0).finished())};
  it.weights = {2.0, 1.0};
  Vector u = p.cell_values(it);
  CHECK(u(0) == doctest::Approx(1.5));   // (2 + 1) / alpha
  CHECK(u(1) == doctest::Approx(-0.5));  // (-2 + 1) / alpha
}

TEST_CASE("smoothing operator instance terminates with a binary control") {
  EffortInstance inst;
  inst.K = make_effort_operator(9, 16, EffortOperator::Smoothing, 0);
  inst.cell_measure = Vector::Constant(16, 1.0 / 16.0);
  inst.alpha = 1.0;
  Vector s(16);
  for (int i = 0; i < 16; ++i) s(i) = i < 8 ? 1.0 : -1.0;
  inst.y_d = inst.K * (2.0 * s);
  MinEffortProblem p(std::move(inst));
  SolverConfig cfg;
  cfg.max_iter = 100;
  auto res = solve(p, cfg);
  CHECK(res.reason != TerminationReason::MaxIter);
  const Vector u = p.cell_values(res.iterate);
  const Vector pbar = p.dual(res.iterate.forward(9)).vec;
  CHECK(p.binariness_check(u, pbar, 1e-3).pass);
}
