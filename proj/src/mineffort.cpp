#include "fcgcg/mineffort.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fcgcg/errors.hpp"

namespace fcgcg {

void EffortInstance::validate() const {
  if (K.cols() < 1 || K.rows() < 1) throw ConfigInvalid("effort operator must be nonempty");
  if (cell_measure.size() != K.cols()) throw ConfigInvalid("cell_measure dimension mismatch");
  if (cell_measure.minCoeff() <= 0.0) throw ConfigInvalid("cell measures must be positive");
  if (!(alpha > 0.0)) throw ConfigInvalid("alpha must be positive");
  if (y_d.size() != K.rows()) throw ConfigInvalid("y_d dimension mismatch");
  if (!K.allFinite()) throw ConfigInvalid("effort operator must be finite");
}

Matrix make_effort_operator(int m, int n, EffortOperator kind, std::uint64_t seed) {
  switch (kind) {
    case EffortOperator::Identity: {
      if (m != n) throw ConfigInvalid("identity operator requires m == n");
      return Matrix::Identity(m, n);
    }
    case EffortOperator::Gaussian: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      Matrix k(m, n);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) k(r, c) = gauss(rng);
      return k / std::sqrt(static_cast<double>(m));
    }
    case EffortOperator::Smoothing: {
      // Row r averages cells around position r scaled to the cell axis.
      Matrix k(m, n);
      const double width = std::max(1.0, n / 8.0);
      for (int r = 0; r < m; ++r) {
        const double center = (r + 0.5) * n / m;
        for (int c = 0; c < n; ++c) {
          const double d = (c + 0.5 - center) / width;
          k(r, c) = std::exp(-0.5 * d * d);
        }
        k.row(r) /= k.row(r).sum();
      }
      return k;
    }
  }
  throw ConfigInvalid("unknown effort operator kind");
}

MinEffortProblem::MinEffortProblem(EffortInstance instance) : instance_(std::move(instance)) {
  instance_.validate();
}

double MinEffortProblem::loss_eval(const Vector& y) const {
  return 0.5 * (y - instance_.y_d).squaredNorm();
}

Vector MinEffortProblem::loss_grad(const Vector& y) const { return y - instance_.y_d; }

std::optional<QuadraticLoss> MinEffortProblem::quadratic_loss() const {
  QuadraticLoss ql;
  ql.weights = Vector::Ones(observation_dim());
  ql.target = instance_.y_d;
  return ql;
}

DualHandle MinEffortProblem::dual(const Vector& y) const {
  DualHandle d;
  // <K_* y, u> = (y, K u) forces the cell representative (K^T y)_i / m_i.
  d.vec = (instance_.K.transpose() * (instance_.y_d - y)).cwiseQuotient(instance_.cell_measure);
  return d;
}

Atom MinEffortProblem::make_atom(const Vector& pattern) const {
  Atom a;
  a.payload = pattern;
  std::string key(pattern.size(), '+');
  for (long i = 0; i < pattern.size(); ++i) key[i] = pattern(i) > 0.0 ? '+' : '-';
  a.key = std::move(key);
  a.forward_image = instance_.K * pattern / instance_.alpha;
  return a;
}

std::pair<Atom, double> MinEffortProblem::insert(const DualHandle& dual) const {
  Vector s(instance_.cells());
  double value = 0.0;
  for (int i = 0; i < instance_.cells(); ++i) {
    s(i) = dual.vec(i) >= 0.0 ? 1.0 : -1.0;  // sign(0) = +1 tie rule
    value += std::abs(dual.vec(i)) * instance_.cell_measure(i);
  }
  return {make_atom(s), value / instance_.alpha};
}

double MinEffortProblem::dual_value(const DualHandle& dual, const Atom& atom) const {
  return dual.vec.cwiseProduct(atom.payload).dot(instance_.cell_measure) / instance_.alpha;
}

std::string MinEffortProblem::atom_csv_header() const {
  std::ostringstream os;
  os << "weight";
  for (int i = 0; i < instance_.cells(); ++i) os << ",s" << i;
  return os.str();
}

std::string MinEffortProblem::atom_csv_row(const Atom& atom, double weight) const {
  std::ostringstream os;
  os.precision(17);
  os << weight;
  for (long i = 0; i < atom.payload.size(); ++i)
    os << "," << static_cast<int>(atom.payload(i));
  return os.str();
}

Vector MinEffortProblem::cell_values(const ActiveIterate& iterate) const {
  Vector u = Vector::Zero(instance_.cells());
  for (size_t k = 0; k < iterate.atoms.size(); ++k)
    u += iterate.weights[k] / instance_.alpha * iterate.atoms[k].payload;
  return u;
}

BinarinessReport MinEffortProblem::binariness_check(const Vector& u, const Vector& p_bar,
                                                    double eps, double tol) const {
  BinarinessReport rep;
  rep.lambda_hat = u.size() > 0 ? u.cwiseAbs().maxCoeff() : 0.0;
  rep.pass = true;
  for (long i = 0; i < u.size(); ++i) {
    if (std::abs(p_bar(i)) <= eps) continue;
    const double gap = std::abs(std::abs(u(i)) - rep.lambda_hat) /
                       std::max(rep.lambda_hat, 1e-300);
    rep.worst_relative_gap = std::max(rep.worst_relative_gap, gap);
    const bool sign_ok = u(i) * p_bar(i) > 0.0 || rep.lambda_hat == 0.0;
    if (gap > tol || !sign_ok) rep.pass = false;
  }
  return rep;
}

double MinEffortProblem::smallvalue_measure(const Vector& p_bar, double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  double total = 0.0;
  for (long i = 0; i < p_bar.size(); ++i)
    if (std::abs(p_bar(i)) <= eps) total += instance_.cell_measure(i);
  return total;
}

}  // namespace fcgcg
