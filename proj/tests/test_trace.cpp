#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fcgcg/errors.hpp"
#include "fcgcg/jacobi_eigen.hpp"
#include "fcgcg/solver.hpp"
#include "fcgcg/trace.hpp"

using namespace fcgcg;

namespace {

// Diagonal two-sensor instance with a closed form: sensors diag(1,0) and
// diag(0,1), y_d = (1, 0), beta = 0.1. Along U = lam beta^{-1} e1 e1^T the
// objective is (lam/beta - 1)^2 / 2 + lam, minimized at lam = beta(1 - beta)
// = 0.09, i.e. U = 0.9 e1 e1^T with J* = 0.095 and sigma1(P_bar) = beta.
TraceInstance diagonal_instance() {
  TraceInstance inst;
  inst.n = 2;
  inst.sensors = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  inst.sensors[0](0, 0) = 1.0;
  inst.sensors[1](1, 1) = 1.0;
  inst.beta = 0.1;
  inst.y_d = (Vector(2) << 1.0, 0.0).finished();
  return inst;
}

}  // namespace

TEST_CASE("instance validation rejects malformed inputs") {
  auto inst = diagonal_instance();
  inst.beta = 0.0;
  CHECK_THROWS_AS(TraceProblem(inst).loss_eval(Vector::Zero(2)), ConfigInvalid);
  inst = diagonal_instance();
  inst.sensors[0](0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(TraceProblem(inst).loss_eval(Vector::Zero(2)), ConfigInvalid);
  inst = diagonal_instance();
  inst.y_d = Vector::Zero(3);
  CHECK_THROWS_AS(TraceProblem(inst).loss_eval(Vector::Zero(2)), ConfigInvalid);
}

TEST_CASE("sensor ensembles are seeded, symmetric, and shaped") {
  auto a = make_sensors(4, 6, SensorEnsemble::GaussianSymmetric, 3);
  auto b = make_sensors(4, 6, SensorEnsemble::GaussianSymmetric, 3);
  REQUIRE(a.size() == 6);
  for (size_t j = 0; j < a.size(); ++j) {
    CHECK((a[j] - a[j].transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a[j] - b[j]).cwiseAbs().maxCoeff() == 0.0);
  }
  auto r = make_sensors(4, 3, SensorEnsemble::RankOne, 3);
  for (const auto& s : r) {
    auto eig = jacobi_eigen(s);
    CHECK(eig.values(0) > 0.0);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(eig.values(i)) <= 1e-12 * eig.values(0));
  }
}

TEST_CASE("atoms are canonical unit rank-one payloads") {
  TraceProblem p(diagonal_instance());
  Vector h = (Vector(2) << -3.0, -4.0).finished();
  Atom a1 = p.make_atom(h);
  Atom a2 = p.make_atom(-h);
  CHECK(a1.key == a2.key);  // sign canonicalization
  CHECK(a1.payload.norm() == doctest::Approx(1.0).epsilon(1e-14));
  // Forward image: (K U)_j / beta for U = h h^T with unit h.
  const Vector hn = h.normalized();
  for (int j = 0; j < 2; ++j)
    CHECK(a1.forward_image(j) ==
          doctest::Approx(hn.dot(p.instance().sensors[j] * hn) / p.instance().beta)
              .epsilon(1e-14));
}

TEST_CASE("dual matrix accumulates sensors against the data misfit") {
  TraceProblem p(diagonal_instance());
  Vector y = (Vector(2) << 0.25, -0.5).finished();
  DualHandle d = p.dual(y);
  Matrix expect = (1.0 - 0.25) * p.instance().sensors[0] + (0.0 + 0.5) * p.instance().sensors[1];
  CHECK((d.mat - expect).cwiseAbs().maxCoeff() <= 1e-15);
  // Insertion returns the leading eigenvector scaled by 1/beta.
  auto [atom, value] = p.insert(d);
  CHECK(value == doctest::Approx(0.75 / 0.1).epsilon(1e-12));
  CHECK(std::abs(atom.payload(0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.dual_value(d, atom) == doctest::Approx(value).epsilon(1e-12));
}

TEST_CASE("diagonal instance reproduces the closed-form optimum") {
  TraceProblem p(diagonal_instance());
  SolverConfig cfg;
  cfg.max_iter = 50;
  cfg.stop_tol = 1e-10;
  auto res = solve(p, cfg);
  CHECK(res.reason != TerminationReason::MaxIter);
  REQUIRE(res.iterate.size() == 1);
  CHECK(res.iterate.weights[0] == doctest::Approx(0.09).epsilon(1e-8));
  CHECK(std::abs(res.iterate.atoms[0].payload(0)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(objective(res.iterate, p) == doctest::Approx(0.095).epsilon(1e-10));

  const Vector y = res.iterate.forward(p.observation_dim());
  const Matrix pbar = p.dual(y).mat;
  auto gap = p.spectral_gap_check(pbar);
  CHECK(gap.sigma1 == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(gap.pass);
  auto growth = p.growth_probe(pbar, res.iterate.atoms[0].payload, 200, 42);
  CHECK(growth.pass);
  // Diagonal dual: growth constant is exactly (sigma1 - sigma2) beta / 2.
  CHECK(growth.min_growth_ratio >=
        (gap.sigma1 - gap.sigma2) * p.instance().beta / 2.0 - 1e-9);
}

TEST_CASE("consolidate merges jittered copies of one extremal point") {
  TraceProblem p(diagonal_instance());
  Vector h1 = (Vector(2) << 1.0, 0.0).finished();
  Vector h2 = (Vector(2) << 1.0, 1e-8).finished();  // distinct key, same point
  ActiveIterate it;
  it.atoms = {p.make_atom(h1), p.make_atom(h2)};
  it.weights = {0.05, 0.04};
  REQUIRE(it.atoms[0].key != it.atoms[1].key);
  CHECK(p.consolidate(it));
  REQUIRE(it.size() == 1);
  CHECK(it.weights[0] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(std::abs(it.atoms[0].payload(0)) == doctest::Approx(1.0).epsilon(1e-12));
  // Genuinely different directions are left alone.
  ActiveIterate two;
  two.atoms = {p.make_atom(h1), p.make_atom((Vector(2) << 0.0, 1.0).finished())};
  two.weights = {0.05, 0.04};
  CHECK_FALSE(p.consolidate(two));
  CHECK(two.size() == 2);
}

TEST_CASE("planted rank-one instances recover a dominant atom") {
  const int n = 8, m = 64;
  auto sensors = make_sensors(n, m, SensorEnsemble::GaussianSymmetric, 21);
  Vector h = Vector::Zero(n);
  h(2) = 3.0;
  h(5) = 4.0;
  h /= h.norm();
  TraceInstance inst;
  inst.n = n;
  inst.sensors = sensors;
  inst.y_d = Vector(m);
  for (int j = 0; j < m; ++j) inst.y_d(j) = h.dot(sensors[j] * h);
  // Calibrate beta to a quarter of sigma1 of the zero-iterate dual.
  TraceProblem probe([&] {
    auto tmp = inst;
    tmp.beta = 1.0;
    return tmp;
  }());
  inst.beta = 0.25 * jacobi_eigen(probe.dual(Vector::Zero(m)).mat).values(0);
  TraceProblem p(inst);
  SolverConfig cfg;
  cfg.max_iter = 200;
  cfg.stop_tol = 1e-9;
  auto res = solve(p, cfg);
  CHECK(res.reason != TerminationReason::MaxIter);
  REQUIRE(res.iterate.size() >= 1);
  size_t imax = 0;
  double wmax = 0.0, wtot = 0.0;
  for (size_t i = 0; i < res.iterate.weights.size(); ++i) {
    wtot += res.iterate.weights[i];
    if (res.iterate.weights[i] > wmax) {
      wmax = res.iterate.weights[i];
      imax = i;
    }
  }
  CHECK(wmax / wtot >= 1.0 - 1e-6);
  // The regularizer shrinks toward the sensors' principal direction, so the
  // recovered direction is close to, not exactly, the planted one.
  CHECK(std::abs(res.iterate.atoms[imax].payload.dot(h)) >= 1.0 - 5e-3);
}
