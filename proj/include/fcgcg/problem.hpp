#pragma once

#include <optional>
#include <string>
#include <utility>

#include "fcgcg/types.hpp"

namespace fcgcg {

// Quadratic loss F(y) = 1/2 * sum_i weights_i * (y_i - target_i)^2. The
// diagonal weights realize the discrete Y inner product (h^2 quadrature for
// the heat problem, ones otherwise). Exposed so the coefficient subproblem
// can take the exact active-set path.
struct QuadraticLoss {
  Vector weights;
  Vector target;

  double eval(const Vector& y) const {
    Vector d = y - target;
    return 0.5 * d.cwiseProduct(d).dot(weights);
  }
  // Euclidean representative of grad F: columns^T * grad gives d/d lambda.
  Vector grad(const Vector& y) const { return weights.cwiseProduct(y - target); }
};

// Contract binding K, K_*, F, the atom set and the insertion subproblem for
// one problem instance. Implementations must be safe for concurrent
// read-only use; internal caches must be synchronized.
class ProblemOracle {
 public:
  virtual ~ProblemOracle() = default;

  virtual int observation_dim() const = 0;

  virtual double loss_eval(const Vector& y) const = 0;
  // Euclidean gradient representative: for a column g, g.dot(loss_grad(y))
  // equals the Y-pairing (g, grad F(y))_Y.
  virtual Vector loss_grad(const Vector& y) const = 0;
  // Present for every shipped problem; enables the exact subproblem path.
  virtual std::optional<QuadraticLoss> quadratic_loss() const = 0;

  // p = -K_* grad F(y) for the observation y = K u.
  virtual DualHandle dual(const Vector& y) const = 0;

  // max_{v in Ext(B)} <p, v>; ties broken by lowest canonical key.
  virtual std::pair<Atom, double> insert(const DualHandle& dual) const = 0;

  // <p, atom>, linear in the atom payload.
  virtual double dual_value(const DualHandle& dual, const Atom& atom) const = 0;

  // CSV dump hooks for recovered atoms.
  virtual std::string atom_csv_header() const = 0;
  virtual std::string atom_csv_row(const Atom& atom, double weight) const = 0;

  // Merge active atoms that are numerical twins of the same extremal point
  // (e.g. eigenvector jitter across iterations). Returns true if the iterate
  // changed; callers must re-run the coefficient subproblem afterwards.
  // Default: atoms are exactly identified by their key, nothing to merge.
  virtual bool consolidate(ActiveIterate&) const { return false; }
};

}  // namespace fcgcg
