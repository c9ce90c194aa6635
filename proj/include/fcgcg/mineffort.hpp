#pragma once

#include <cstdint>

#include "fcgcg/problem.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

// Minimum-effort problem on a discretized domain: G = alpha * ||u||_inf,
// atoms are alpha^{-1}-scaled sign patterns; the duality pairing carries the
// cell measures, <p, u> = sum_i p_i u_i measure_i.
struct EffortInstance {
  Vector cell_measure;
  Matrix K;  // m x n
  double alpha = 0.0;
  Vector y_d;

  int cells() const { return static_cast<int>(K.cols()); }
  void validate() const;
};

enum class EffortOperator { Identity, Gaussian, Smoothing };

// Seeded m x n operator generator; Smoothing builds a 1-D averaging kernel.
Matrix make_effort_operator(int m, int n, EffortOperator kind, std::uint64_t seed);

struct BinarinessReport {
  double lambda_hat = 0.0;  // max_i |u_i|
  double worst_relative_gap = 0.0;
  bool pass = false;
};

class MinEffortProblem : public ProblemOracle {
 public:
  explicit MinEffortProblem(EffortInstance instance);

  int observation_dim() const override { return static_cast<int>(instance_.K.rows()); }
  double loss_eval(const Vector& y) const override;
  Vector loss_grad(const Vector& y) const override;
  std::optional<QuadraticLoss> quadratic_loss() const override;
  DualHandle dual(const Vector& y) const override;
  std::pair<Atom, double> insert(const DualHandle& dual) const override;
  double dual_value(const DualHandle& dual, const Atom& atom) const override;
  std::string atom_csv_header() const override;
  std::string atom_csv_row(const Atom& atom, double weight) const override;

  const EffortInstance& instance() const { return instance_; }

  // Atom for a sign pattern s in {-1,+1}^n, scaled by alpha^{-1}.
  Atom make_atom(const Vector& pattern) const;

  // Cell function of the iterate, u_i = sum_k weight_k * alpha^{-1} s_k(i).
  Vector cell_values(const ActiveIterate& iterate) const;

  // Solution-structure probe: on cells with |p_i| > eps, |u_i| must sit at
  // the common level max|u| with sign matching p.
  BinarinessReport binariness_check(const Vector& u, const Vector& p_bar, double eps,
                                    double tol = 1e-6) const;

  // Measure of {|p| <= eps}; diagnostics sweep this over eps.
  double smallvalue_measure(const Vector& p_bar, double eps) const;

 private:
  EffortInstance instance_;
};

}  // namespace fcgcg
