#include "fcgcg/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "fcgcg/errors.hpp"

namespace fcgcg {

MeasureView MeasureView::from_iterate(const ActiveIterate& it) {
  MeasureView mv;
  mv.support = it.atoms;
  mv.masses = it.weights;
  mv.total_mass = it.total_weight();
  return mv;
}

double MeasureView::lifted_objective(const ProblemOracle& problem) const {
  Vector y = Vector::Zero(problem.observation_dim());
  for (size_t i = 0; i < support.size(); ++i) y += masses[i] * support[i].forward_image;
  return problem.loss_eval(y) + total_mass;
}

FirstOrderReport verify_first_order(const ActiveIterate& iterate, const ProblemOracle& problem,
                                    double tol) {
  const Vector y = iterate.forward(problem.observation_dim());
  const DualHandle dual = problem.dual(y);
  auto [atom, value] = problem.insert(dual);

  double pairing = 0.0;
  for (size_t i = 0; i < iterate.atoms.size(); ++i)
    pairing += iterate.weights[i] * problem.dual_value(dual, iterate.atoms[i]);
  const double gauge = iterate.total_weight();

  FirstOrderReport rep;
  rep.insertion_value = value;
  rep.pairing_slack = std::abs(pairing - gauge) / (1.0 + gauge);
  rep.pass = value <= 1.0 + tol && std::abs(pairing - gauge) <= tol * (1.0 + gauge);
  return rep;
}

PinningReport verify_active_pinning(const DualHandle& dual, const ActiveIterate& iterate,
                                    const ProblemOracle& problem, double slack) {
  PinningReport rep;
  rep.pass = true;
  for (size_t i = 0; i < iterate.atoms.size(); ++i) {
    const double v = problem.dual_value(dual, iterate.atoms[i]);
    if (iterate.weights[i] > 0.0) {
      rep.max_deviation = std::max(rep.max_deviation, std::abs(v - 1.0));
      if (std::abs(v - 1.0) > slack) rep.pass = false;
    } else {
      // KKT inequality branch for zero-weight atoms.
      rep.max_deviation = std::max(rep.max_deviation, std::max(0.0, v - 1.0));
      if (v > 1.0 + slack) rep.pass = false;
    }
  }
  return rep;
}

DominanceReport verify_residual_dominance(const std::vector<double>& residual_u,
                                          const std::vector<double>& residual_mu) {
  if (residual_u.size() != residual_mu.size())
    throw std::invalid_argument("residual sequences must have equal length");
  DominanceReport rep;
  rep.pass = true;
  for (size_t k = 0; k < residual_u.size(); ++k) {
    const double gap = residual_u[k] - residual_mu[k];
    rep.max_gap = std::max(rep.max_gap, gap);
    rep.max_abs_gap = std::max(rep.max_abs_gap, std::abs(gap));
    if (gap > 1e-12 * (1.0 + std::abs(residual_mu[k]))) rep.pass = false;
  }
  rep.equality = true;
  for (size_t k = 0; k < residual_u.size(); ++k)
    if (std::abs(residual_u[k] - residual_mu[k]) > 1e-12 * (1.0 + std::abs(residual_mu[k])))
      rep.equality = false;
  return rep;
}

bool verify_monotone(const std::vector<double>& objectives, double tol) {
  if (objectives.empty()) throw std::invalid_argument("objective sequence is empty");
  for (size_t k = 0; k + 1 < objectives.size(); ++k)
    if (objectives[k + 1] > objectives[k] + tol) return false;
  return true;
}

double rate_noise_floor(double reference_objective) {
  return 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(reference_objective));
}

RateFit fit_linear_rate(const std::vector<double>& residuals, double tail_fraction,
                        double noise_floor) {
  std::vector<std::pair<int, double>> usable;
  for (size_t k = 0; k < residuals.size(); ++k)
    if (residuals[k] > noise_floor) usable.emplace_back(static_cast<int>(k), residuals[k]);
  if (usable.size() < 3) throw InsufficientData("need >= 3 residuals above the noise floor");

  const size_t tail = std::max<size_t>(3, static_cast<size_t>(
                                              std::ceil(tail_fraction * usable.size())));
  const size_t start = usable.size() > tail ? usable.size() - tail : 0;

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const size_t npts = usable.size() - start;
  for (size_t i = start; i < usable.size(); ++i) {
    const double x = usable[i].first;
    const double y = std::log(usable[i].second);
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
  }
  const double n = static_cast<double>(npts);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double sst = syy - sy * sy / n;
  double ssr = 0.0;
  const double intercept = (sy - slope * sx) / n;
  for (size_t i = start; i < usable.size(); ++i) {
    const double e = std::log(usable[i].second) - (slope * usable[i].first + intercept);
    ssr += e * e;
  }

  RateFit fit;
  fit.zeta_hat = std::exp(slope);
  fit.window_start = usable[start].first;
  fit.window_end = usable.back().first;
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return fit;
}

double sublinear_bound_check(const std::vector<double>& residuals) {
  double c_hat = 0.0;
  for (size_t k = 0; k < residuals.size(); ++k)
    c_hat = std::max(c_hat, (k + 1.0) * residuals[k]);
  return c_hat;
}

}  // namespace fcgcg
