#include "fcgcg/jacobi_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fcgcg/errors.hpp"

namespace fcgcg {

EigenDecomposition jacobi_eigen(const Matrix& a, double tol, int max_sweeps) {
  const long n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("jacobi_eigen: matrix must be square");

  Matrix A = 0.5 * (a + a.transpose());
  Matrix V = Matrix::Identity(n, n);
  const double scale = std::max(A.norm(), 1e-300);

  EigenDecomposition out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (long p = 0; p < n; ++p)
      for (long q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    out.sweeps = sweep;
    if (std::sqrt(2.0 * off) <= tol * scale) break;

    for (long p = 0; p < n - 1; ++p) {
      for (long q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        // Classic two-sided rotation annihilating A(p,q).
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (long k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (long k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (long k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](long i, long j) { return A(i, i) > A(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (long i = 0; i < n; ++i) {
    out.values(i) = A(order[i], order[i]);
    out.vectors.col(i) = V.col(order[i]);
  }
  return out;
}

std::pair<double, Vector> power_leading(const Matrix& a, double tol, int max_iter) {
  const long n = a.rows();
  // Shift so the eigenvalue of largest algebraic value dominates.
  const double shift = a.cwiseAbs().rowwise().sum().maxCoeff();
  Matrix B = a + shift * Matrix::Identity(n, n);

  Vector v = Vector::Ones(n).normalized();
  double mu = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = B * v;
    const double norm = w.norm();
    if (norm <= 1e-300) return {-shift, v};
    w /= norm;
    mu = v.dot(a * v);
    if ((a * w - w.dot(a * w) * w).norm() <= tol * std::max(1.0, a.norm())) {
      v = w;
      return {v.dot(a * v), v};
    }
    v = w;
  }
  throw EigenFailure("power iteration stagnated");
}

}  // namespace fcgcg
