#pragma once

#include <cstdint>
#include <vector>

#include "fcgcg/problem.hpp"
#include "fcgcg/types.hpp"

namespace fcgcg {

// Trace-regularized PSD recovery over R^n: measurements (K U)_j = tr(A_j U)
// against m given symmetric sensors A_j.
struct TraceInstance {
  int n = 0;
  std::vector<Matrix> sensors;
  double beta = 0.0;
  Vector y_d;

  void validate() const;
};

enum class SensorEnsemble { GaussianSymmetric, RankOne };

// Seeded sensor generator; RankOne draws a a^T "phase retrieval" style
// sensors, GaussianSymmetric draws symmetrized Gaussian matrices.
std::vector<Matrix> make_sensors(int n, int m, SensorEnsemble ensemble, std::uint64_t seed);

struct SpectralGapReport {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  bool pass = false;
};

struct GrowthProbeReport {
  double min_growth_ratio = 0.0;   // min (1 - <P,U>) / ||U - U1||_HS^2
  double max_lipschitz_ratio = 0.0;  // max ||K(U - U1)|| / ||U - U1||_HS
  bool pass = false;
};

class TraceProblem : public ProblemOracle {
 public:
  explicit TraceProblem(TraceInstance instance);

  int observation_dim() const override { return static_cast<int>(instance_.sensors.size()); }
  double loss_eval(const Vector& y) const override;
  Vector loss_grad(const Vector& y) const override;
  std::optional<QuadraticLoss> quadratic_loss() const override;
  DualHandle dual(const Vector& y) const override;
  std::pair<Atom, double> insert(const DualHandle& dual) const override;
  double dual_value(const DualHandle& dual, const Atom& atom) const override;
  std::string atom_csv_header() const override;
  std::string atom_csv_row(const Atom& atom, double weight) const override;
  bool consolidate(ActiveIterate& iterate) const override;

  const TraceInstance& instance() const { return instance_; }

  // Atom for the scaled rank-one beta^{-1} h h^T; h gets canonical sign and
  // is rounded to 1e-10 for the key.
  Atom make_atom(Vector h) const;

  // P = -K_* grad F = sum_j (y_d - y)_j A_j for a raw gradient vector.
  Matrix dual_matrix(const Vector& grad_f) const;

  // D1 probe: sigma1 ~= beta and a strict spectral gap.
  SpectralGapReport spectral_gap_check(const Matrix& p_bar, double tol = 1e-6,
                                       double gap_min = 1e-8) const;

  // Quadratic-growth probe of the dual at the rank-one solution; samples are
  // beta^{-1} h h^T for random unit h.
  GrowthProbeReport growth_probe(const Matrix& p_bar, const Vector& h1, int samples,
                                 std::uint64_t seed, double kappa_min = 1e-12) const;

 private:
  TraceInstance instance_;
};

}  // namespace fcgcg
