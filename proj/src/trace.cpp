#include "fcgcg/trace.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fcgcg/errors.hpp"
#include "fcgcg/jacobi_eigen.hpp"

namespace fcgcg {

void TraceInstance::validate() const {
  if (n < 1) throw ConfigInvalid("trace instance needs n >= 1");
  if (sensors.empty()) throw ConfigInvalid("trace instance needs at least one sensor");
  if (!(beta > 0.0)) throw ConfigInvalid("beta must be positive");
  if (y_d.size() != static_cast<long>(sensors.size()))
    throw ConfigInvalid("y_d dimension must match the number of sensors");
  for (const auto& a : sensors) {
    if (a.rows() != n || a.cols() != n) throw ConfigInvalid("sensor dimension mismatch");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + a.norm()))
      throw ConfigInvalid("sensors must be symmetric");
  }
}

std::vector<Matrix> make_sensors(int n, int m, SensorEnsemble ensemble, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) {
    if (ensemble == SensorEnsemble::RankOne) {
      Vector a(n);
      for (int i = 0; i < n; ++i) a(i) = gauss(rng);
      out.push_back(a * a.transpose());
    } else {
      Matrix g(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) = gauss(rng);
      out.push_back(0.5 * (g + g.transpose()));
    }
  }
  return out;
}

TraceProblem::TraceProblem(TraceInstance instance) : instance_(std::move(instance)) {
  instance_.validate();
}

double TraceProblem::loss_eval(const Vector& y) const {
  return 0.5 * (y - instance_.y_d).squaredNorm();
}

Vector TraceProblem::loss_grad(const Vector& y) const { return y - instance_.y_d; }

std::optional<QuadraticLoss> TraceProblem::quadratic_loss() const {
  QuadraticLoss ql;
  ql.weights = Vector::Ones(observation_dim());
  ql.target = instance_.y_d;
  return ql;
}

Matrix TraceProblem::dual_matrix(const Vector& grad_f) const {
  Matrix p = Matrix::Zero(instance_.n, instance_.n);
  for (size_t j = 0; j < instance_.sensors.size(); ++j) p -= grad_f(j) * instance_.sensors[j];
  return p;
}

DualHandle TraceProblem::dual(const Vector& y) const {
  DualHandle d;
  d.mat = dual_matrix(loss_grad(y));
  return d;
}

Atom TraceProblem::make_atom(Vector h) const {
  h.normalize();
  // Canonical sign: first component of nonneglible magnitude positive.
  for (long i = 0; i < h.size(); ++i) {
    if (std::abs(h(i)) > 1e-12) {
      if (h(i) < 0.0) h = -h;
      break;
    }
  }
  Atom a;
  a.payload = h;
  std::ostringstream key;
  key.precision(10);
  key << std::fixed;
  for (long i = 0; i < h.size(); ++i) key << (i ? "," : "") << h(i);
  a.key = key.str();
  a.forward_image.resize(observation_dim());
  for (size_t j = 0; j < instance_.sensors.size(); ++j)
    a.forward_image(j) = h.dot(instance_.sensors[j] * h) / instance_.beta;
  return a;
}

std::pair<Atom, double> TraceProblem::insert(const DualHandle& dual) const {
  Vector h1;
  double sigma1;
  if (instance_.n <= 512) {
    auto eig = jacobi_eigen(dual.mat);
    sigma1 = eig.values(0);
    h1 = eig.vectors.col(0);
  } else {
    auto [mu, v] = power_leading(dual.mat);
    sigma1 = mu;
    h1 = v;
  }
  if (dual.mat.norm() <= 1e-300) {  // degenerate zero dual: convention e_1
    h1 = Vector::Zero(instance_.n);
    h1(0) = 1.0;
    sigma1 = 0.0;
  }
  return {make_atom(h1), sigma1 / instance_.beta};
}

double TraceProblem::dual_value(const DualHandle& dual, const Atom& atom) const {
  return atom.payload.dot(dual.mat * atom.payload) / instance_.beta;
}

std::string TraceProblem::atom_csv_header() const {
  std::ostringstream os;
  os << "weight";
  for (int i = 0; i < instance_.n; ++i) os << ",h" << i;
  return os.str();
}

std::string TraceProblem::atom_csv_row(const Atom& atom, double weight) const {
  std::ostringstream os;
  os.precision(17);
  os << weight;
  for (long i = 0; i < atom.payload.size(); ++i) os << "," << atom.payload(i);
  return os.str();
}

bool TraceProblem::consolidate(ActiveIterate& iterate) const {
  const size_t n_atoms = iterate.atoms.size();
  if (n_atoms < 2) return false;
  // Cluster atoms whose directions agree up to sign to ~1e-3 radians: that
  // is far below the O(1) separation of gap-separated eigdirections yet far
  // above the jitter the insertion eigensolver leaves near convergence.
  const double cos_tol = 1e-6;
  std::vector<int> cluster(n_atoms, -1);
  int n_clusters = 0;
  for (size_t i = 0; i < n_atoms; ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = n_clusters++;
    for (size_t j = i + 1; j < n_atoms; ++j) {
      if (cluster[j] >= 0) continue;
      const double c = std::abs(iterate.atoms[i].payload.dot(iterate.atoms[j].payload));
      if (1.0 - c <= cos_tol) cluster[j] = cluster[i];
    }
  }
  if (n_clusters == static_cast<int>(n_atoms)) return false;

  ActiveIterate merged;
  for (int c = 0; c < n_clusters; ++c) {
    Matrix sum = Matrix::Zero(instance_.n, instance_.n);
    double weight = 0.0;
    int members = 0;
    for (size_t i = 0; i < n_atoms; ++i) {
      if (cluster[i] != c) continue;
      sum += iterate.weights[i] * iterate.atoms[i].payload *
             iterate.atoms[i].payload.transpose();
      weight += iterate.weights[i];
      ++members;
    }
    if (members == 1) {
      for (size_t i = 0; i < n_atoms; ++i)
        if (cluster[i] == c) {
          merged.atoms.push_back(iterate.atoms[i]);
          merged.weights.push_back(iterate.weights[i]);
        }
      continue;
    }
    // Best rank-one surrogate of the cluster: its leading eigendirection.
    auto eig = jacobi_eigen(sum);
    merged.atoms.push_back(make_atom(eig.vectors.col(0)));
    merged.weights.push_back(weight);
  }
  iterate = std::move(merged);
  return true;
}

SpectralGapReport TraceProblem::spectral_gap_check(const Matrix& p_bar, double tol,
                                                   double gap_min) const {
  auto eig = jacobi_eigen(p_bar);
  SpectralGapReport rep;
  rep.sigma1 = eig.values(0);
  rep.sigma2 = eig.values.size() > 1 ? eig.values(1) : -std::numeric_limits<double>::infinity();
  rep.pass = std::abs(rep.sigma1 - instance_.beta) <= tol && rep.sigma1 - rep.sigma2 >= gap_min;
  return rep;
}

GrowthProbeReport TraceProblem::growth_probe(const Matrix& p_bar, const Vector& h1, int samples,
                                             std::uint64_t seed, double kappa_min) const {
  const double beta = instance_.beta;
  Vector h1n = h1.normalized();
  const Matrix u1 = h1n * h1n.transpose() / beta;
  Vector ku1(observation_dim());
  for (size_t j = 0; j < instance_.sensors.size(); ++j)
    ku1(j) = h1n.dot(instance_.sensors[j] * h1n) / beta;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GrowthProbeReport rep;
  rep.min_growth_ratio = std::numeric_limits<double>::infinity();
  rep.max_lipschitz_ratio = 0.0;
  int used = 0;
  while (used < samples) {
    Vector h(instance_.n);
    for (int i = 0; i < instance_.n; ++i) h(i) = gauss(rng);
    h.normalize();
    const Matrix u = h * h.transpose() / beta;
    const double dist = (u - u1).norm();  // Frobenius = HS
    if (dist <= 1e-12) continue;          // U = U1 excluded
    const double pairing = h.dot(p_bar * h) / beta;
    Vector ku(observation_dim());
    for (size_t j = 0; j < instance_.sensors.size(); ++j)
      ku(j) = h.dot(instance_.sensors[j] * h) / beta;
    rep.min_growth_ratio = std::min(rep.min_growth_ratio, (1.0 - pairing) / (dist * dist));
    rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, (ku - ku1).norm() / dist);
    ++used;
  }
  rep.pass = rep.min_growth_ratio >= kappa_min;
  return rep;
}

}  // namespace fcgcg
