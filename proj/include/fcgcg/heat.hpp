#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "fcgcg/problem.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

// Uniform interior grid for the Dirichlet heat equation on (0,1)^2,
// discretized by 5-point finite differences and implicit Euler. The SPD
// matrix I + dt*(-Lap_h) is factored once; forward and adjoint marches reuse
// the factorization (the operator is symmetric, so the adjoint march is the
// same solve).
class HeatGrid {
 public:
  HeatGrid(int n, double dt, double T);

  int n() const { return n_; }
  int nodes() const { return n_ * n_; }
  double h() const { return h_; }
  double dt() const { return dt_; }
  double T() const { return T_; }
  int steps() const { return steps_; }

  int node_index(int ix, int iy) const { return iy * n_ + ix; }
  double node_x(int j) const { return (j % n_ + 1) * h_; }
  double node_y(int j) const { return (j / n_ + 1) * h_; }

  // y(T) from initial grid vector u0: repeated solves of (I + dt A) y = y.
  Vector march(const Vector& v) const;

 private:
  int n_;
  double h_, dt_, T_;
  int steps_;
  Eigen::SparseMatrix<double> system_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver_;
};

Vector heat_forward(const Vector& u0, const HeatGrid& grid);
Vector heat_adjoint(const Vector& phi, const HeatGrid& grid);

struct HeatDataset {
  Vector y_d;
  std::vector<std::pair<std::pair<double, double>, double>> truth;  // ((x,y), coefficient)
  double noise_rel = 0.0;
  std::uint64_t seed = 0;
};

// y_d = K u_truth + noise, with the Gaussian noise rescaled so that
// ||noise||_Y / ||K u_truth||_Y equals noise_rel exactly.
HeatDataset make_dataset(const std::vector<std::pair<std::pair<double, double>, double>>& truth,
                         double noise_rel, std::uint64_t seed, const HeatGrid& grid);

struct CurvatureReport {
  Matrix hessian;         // 2x2 central-difference Hessian of sign * z(0)
  double lambda_max = 0.0;
  double gamma_hat = 0.0;  // -lambda_max when concave
  double radius = 0.0;     // largest scanned radius with quadratic growth
  bool pass = false;
};

class HeatProblem : public ProblemOracle {
 public:
  HeatProblem(std::shared_ptr<const HeatGrid> grid, double beta, Vector y_d);

  int observation_dim() const override { return grid_->nodes(); }
  double loss_eval(const Vector& y) const override;
  Vector loss_grad(const Vector& y) const override;
  std::optional<QuadraticLoss> quadratic_loss() const override;
  DualHandle dual(const Vector& y) const override;
  std::pair<Atom, double> insert(const DualHandle& dual) const override;
  double dual_value(const DualHandle& dual, const Atom& atom) const override;
  std::string atom_csv_header() const override;
  std::string atom_csv_row(const Atom& atom, double weight) const override;

  const HeatGrid& grid() const { return *grid_; }
  double beta() const { return beta_; }
  const Vector& y_d() const { return y_d_; }

  // Atom for a signed Dirac at a grid node; forward images are memoized.
  Atom make_atom(int node, int sign) const;

  // Central-difference curvature of sign * z(0) at a recovered spike node
  // (Hessian step = grid h). radius_cap bounds the outward quadratic-growth
  // scan; gamma_min is the concavity threshold.
  CurvatureReport check_nondegeneracy(const Vector& z0, int node, double radius_cap,
                                      double gamma_min = 1e-6) const;

 private:
  std::shared_ptr<const HeatGrid> grid_;
  double beta_;
  Vector y_d_;
  mutable std::unordered_map<int, Vector> forward_cache_;  // node -> K(+delta)/beta
  mutable std::mutex cache_mutex_;
};

}  // namespace fcgcg
