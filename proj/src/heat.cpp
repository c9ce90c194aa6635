#include "fcgcg/heat.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fcgcg/errors.hpp"

namespace fcgcg {

HeatGrid::HeatGrid(int n, double dt, double T) : n_(n), dt_(dt), T_(T) {
  if (n < 3) throw ConfigInvalid("grid needs at least 3 interior nodes per axis");
  if (!(dt > 0.0) || !(T > 0.0)) throw ConfigInvalid("dt and T must be positive");
  const double ratio = T / dt;
  steps_ = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - steps_) > 1e-12 * std::max(1.0, ratio))
    throw ConfigInvalid("T/dt must be an integer");
  h_ = 1.0 / (n + 1);

  // I + dt * (-Lap_h) with the 5-point Dirichlet stencil.
  const double c = dt_ / (h_ * h_);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(5) * nodes());
  for (int iy = 0; iy < n_; ++iy) {
    for (int ix = 0; ix < n_; ++ix) {
      const int j = node_index(ix, iy);
      trip.emplace_back(j, j, 1.0 + 4.0 * c);
      if (ix > 0) trip.emplace_back(j, node_index(ix - 1, iy), -c);
      if (ix < n_ - 1) trip.emplace_back(j, node_index(ix + 1, iy), -c);
      if (iy > 0) trip.emplace_back(j, node_index(ix, iy - 1), -c);
      if (iy < n_ - 1) trip.emplace_back(j, node_index(ix, iy + 1), -c);
    }
  }
  system_.resize(nodes(), nodes());
  system_.setFromTriplets(trip.begin(), trip.end());
  solver_.compute(system_);
  if (solver_.info() != Eigen::Success) throw SolverError("heat system factorization failed");
}

Vector HeatGrid::march(const Vector& v) const {
  Vector y = v;
  for (int s = 0; s < steps_; ++s) y = solver_.solve(y);
  return y;
}

Vector heat_forward(const Vector& u0, const HeatGrid& grid) { return grid.march(u0); }

Vector heat_adjoint(const Vector& phi, const HeatGrid& grid) {
  // The implicit-Euler operator is symmetric, so the discrete adjoint is the
  // same march.
  return grid.march(phi);
}

HeatDataset make_dataset(const std::vector<std::pair<std::pair<double, double>, double>>& truth,
                         double noise_rel, std::uint64_t seed, const HeatGrid& grid) {
  const double h = grid.h();
  Vector u0 = Vector::Zero(grid.nodes());
  for (const auto& [pos, coef] : truth) {
    const auto [px, py] = pos;
    if (!(px > 0.0 && px < 1.0 && py > 0.0 && py < 1.0))
      throw ConfigInvalid("truth spike must be strictly interior");
    const int ix = std::clamp(static_cast<int>(std::llround(px / h)) - 1, 0, grid.n() - 1);
    const int iy = std::clamp(static_cast<int>(std::llround(py / h)) - 1, 0, grid.n() - 1);
    u0(grid.node_index(ix, iy)) += coef / (h * h);  // nodal Dirac representation
  }
  Vector y = grid.march(u0);

  HeatDataset ds;
  ds.truth = truth;
  ds.noise_rel = noise_rel;
  ds.seed = seed;
  if (noise_rel == 0.0) {
    ds.y_d = y;
    return ds;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector zeta(grid.nodes());
  for (int i = 0; i < zeta.size(); ++i) zeta(i) = gauss(rng);
  // Rescale so the relative L2 noise level is met exactly (the h^2 quadrature
  // weight cancels in the ratio).
  zeta *= noise_rel * y.norm() / zeta.norm();
  ds.y_d = y + zeta;
  return ds;
}

HeatProblem::HeatProblem(std::shared_ptr<const HeatGrid> grid, double beta, Vector y_d)
    : grid_(std::move(grid)), beta_(beta), y_d_(std::move(y_d)) {
  if (!(beta_ > 0.0)) throw ConfigInvalid("beta must be positive");
  if (y_d_.size() != grid_->nodes()) throw ConfigInvalid("y_d dimension mismatch");
}

double HeatProblem::loss_eval(const Vector& y) const {
  const double h2 = grid_->h() * grid_->h();
  return 0.5 * h2 * (y - y_d_).squaredNorm();
}

Vector HeatProblem::loss_grad(const Vector& y) const {
  const double h2 = grid_->h() * grid_->h();
  return h2 * (y - y_d_);
}

std::optional<QuadraticLoss> HeatProblem::quadratic_loss() const {
  QuadraticLoss ql;
  ql.weights = Vector::Constant(grid_->nodes(), grid_->h() * grid_->h());
  ql.target = y_d_;
  return ql;
}

DualHandle HeatProblem::dual(const Vector& y) const {
  DualHandle d;
  d.vec = heat_adjoint(y_d_ - y, *grid_);  // z(0), nodal values
  return d;
}

Atom HeatProblem::make_atom(int node, int sign) const {
  Vector base;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = forward_cache_.find(node);
    if (it != forward_cache_.end()) base = it->second;
  }
  if (base.size() == 0) {
    const double h2 = grid_->h() * grid_->h();
    Vector e = Vector::Zero(grid_->nodes());
    e(node) = 1.0 / (h2 * beta_);
    base = grid_->march(e);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    forward_cache_.emplace(node, base);
  }
  Atom a;
  a.key = std::to_string(node) + (sign > 0 ? "+" : "-");
  a.payload = Vector(2);
  a.payload << static_cast<double>(node), static_cast<double>(sign);
  a.forward_image = sign > 0 ? base : Vector(-base);
  return a;
}

std::pair<Atom, double> HeatProblem::insert(const DualHandle& dual) const {
  const Vector& z0 = dual.vec;
  int best = 0;
  double best_abs = 0.0;
  for (int j = 0; j < z0.size(); ++j) {
    if (std::abs(z0(j)) > best_abs) {  // strict: ties keep the lowest index
      best_abs = std::abs(z0(j));
      best = j;
    }
  }
  const int sign = z0(best) >= 0.0 ? 1 : -1;  // zero dual degenerates to node 0, sign +1
  return {make_atom(best, sign), best_abs / beta_};
}

double HeatProblem::dual_value(const DualHandle& dual, const Atom& atom) const {
  const int node = static_cast<int>(atom.payload(0));
  const double sign = atom.payload(1);
  return sign * dual.vec(node) / beta_;
}

std::string HeatProblem::atom_csv_header() const { return "x,y,sign,weight"; }

std::string HeatProblem::atom_csv_row(const Atom& atom, double weight) const {
  const int node = static_cast<int>(atom.payload(0));
  std::ostringstream os;
  os.precision(17);
  os << grid_->node_x(node) << "," << grid_->node_y(node) << ","
     << static_cast<int>(atom.payload(1)) << "," << weight;
  return os.str();
}

CurvatureReport HeatProblem::check_nondegeneracy(const Vector& z0, int node, double radius_cap,
                                                 double gamma_min) const {
  const int n = grid_->n();
  const double h = grid_->h();
  const int ix = node % n;
  const int iy = node / n;
  if (ix < 1 || ix > n - 2 || iy < 1 || iy > n - 2)
    throw BoundaryTooClose("spike node too close to the boundary for a central stencil");

  const double s = z0(node) >= 0.0 ? 1.0 : -1.0;
  auto v = [&](int dx, int dy) { return s * z0(grid_->node_index(ix + dx, iy + dy)); };

  CurvatureReport rep;
  rep.hessian.resize(2, 2);
  rep.hessian(0, 0) = (v(1, 0) - 2.0 * v(0, 0) + v(-1, 0)) / (h * h);
  rep.hessian(1, 1) = (v(0, 1) - 2.0 * v(0, 0) + v(0, -1)) / (h * h);
  rep.hessian(0, 1) = rep.hessian(1, 0) =
      (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * h * h);

  const double tr = rep.hessian(0, 0) + rep.hessian(1, 1);
  const double det = rep.hessian(0, 0) * rep.hessian(1, 1) - rep.hessian(0, 1) * rep.hessian(1, 0);
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  rep.lambda_max = 0.5 * tr + disc;
  rep.gamma_hat = -rep.lambda_max;
  rep.pass = rep.lambda_max <= -gamma_min;

  // Largest scanned radius on which beta - |z0| >= (gamma_hat/4) |x - x_bar|^2
  // holds at every node.
  if (rep.pass) {
    const double x0 = grid_->node_x(node), y0 = grid_->node_y(node);
    double good = 0.0;
    for (int r = 1; r * h <= radius_cap; ++r) {
      bool ok = true;
      for (int dy = -r; dy <= r && ok; ++dy) {
        for (int dx = -r; dx <= r && ok; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jx >= n || jy < 0 || jy >= n) { ok = false; break; }
          const double px = grid_->node_x(grid_->node_index(jx, jy)) - x0;
          const double py = grid_->node_y(grid_->node_index(jx, jy)) - y0;
          const double d2 = px * px + py * py;
          if (d2 > (r * h) * (r * h) + 1e-15) continue;
          const double lhs = beta_ - std::abs(z0(grid_->node_index(jx, jy)));
          if (lhs < 0.25 * rep.gamma_hat * d2 - 1e-15) ok = false;
        }
      }
      if (!ok) break;
      good = r * h;
    }
    rep.radius = good;
  }
  return rep;
}

}  // namespace fcgcg
