#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fcgcg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One extremal point of the regularizer's unit ball, together with its
// forward image under the measurement operator. The payload is a flat
// numeric descriptor owned by the problem that produced the atom (node index
// and sign, unit vector, sign pattern, ...). `key` is a canonical string
// identity used for duplicate detection; equal keys imply equal payloads.
struct Atom {
  std::string key;
  Vector payload;
  Vector forward_image;
};

// Conic combination u = sum_i weight_i * atom_i. Doubles as the discrete
// measure mu = sum_i weight_i * delta_{atom_i}; the gauge value is the sum
// of the weights (exact for distinct extremal atoms).
struct ActiveIterate {
  std::vector<Atom> atoms;
  std::vector<double> weights;

  int size() const { return static_cast<int>(atoms.size()); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  bool contains(const std::string& key) const {
    for (const auto& a : atoms)
      if (a.key == key) return true;
    return false;
  }
  // Combined forward image K u = sum_i weight_i * forward_image_i.
  Vector forward(int m) const {
    Vector y = Vector::Zero(m);
    for (size_t i = 0; i < atoms.size(); ++i) y += weights[i] * atoms[i].forward_image;
    return y;
  }
};

// Problem-specific dual state p = -K_* grad F(K u). Grid vector for the
// heat and minimum-effort problems, symmetric matrix for the trace problem.
struct DualHandle {
  Vector vec;
  Matrix mat;
};

struct SolverConfig {
  int max_iter = 100;
  double stop_tol = 1e-9;       // additive slack on the <p, v_hat> <= 1 test
  double prune_tol = 1e-12;     // relative to max weight
  double subproblem_tol = 1e-12;  // scaled by (1 + J(u_k)) per iteration
  std::optional<double> reference_objective;  // J* for residual reporting
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  std::optional<double> residual;
  int active_size = 0;
  double insertion_value = 0.0;
  double wall_ms = 0.0;
};

enum class TerminationReason {
  Optimal,             // stop test fired with k >= 1
  MaxIter,
  ReinsertionOptimal,  // candidate already active and value <= 1 + stop_tol
};

const char* to_string(TerminationReason r);

}  // namespace fcgcg
