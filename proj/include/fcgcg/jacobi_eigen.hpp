#pragma once

#include "fcgcg/types.hpp"

namespace fcgcg {

struct EigenDecomposition {
  Vector values;   // sorted descending
  Matrix vectors;  // column i pairs with values(i)
  int sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Rotations are
// applied until all off-diagonal entries fall below tol * ||A||_F.
EigenDecomposition jacobi_eigen(const Matrix& a, double tol = 1e-14, int max_sweeps = 64);

// Leading eigenpair by shifted power iteration; fallback for large n.
std::pair<double, Vector> power_leading(const Matrix& a, double tol = 1e-12,
                                        int max_iter = 100000);

}  // namespace fcgcg
