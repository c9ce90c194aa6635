#include "fcgcg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "fcgcg/diagnostics.hpp"
#include "fcgcg/errors.hpp"
#include "fcgcg/heat.hpp"
#include "fcgcg/jacobi_eigen.hpp"
#include "fcgcg/mineffort.hpp"
#include "fcgcg/trace.hpp"

namespace fcgcg {

namespace {

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) throw ConfigInvalid(context + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigInvalid("unknown key '" + key + "' in " + context);
  }
}

double require_positive(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ConfigInvalid(context + " requires '" + key + "'");
  const double v = obj.at(key).get<double>();
  if (!(v > 0.0)) throw ConfigInvalid(context + "." + key + " must be positive");
  return v;
}

SolverConfig parse_solver(const json& obj, std::optional<std::uint64_t> seed_override) {
  check_keys(obj, {"max_iter", "stop_tol", "prune_tol", "subproblem_tol", "rng_seed",
                   "reference_objective"},
             "solver");
  SolverConfig cfg;
  cfg.max_iter = obj.value("max_iter", 100);
  cfg.stop_tol = obj.value("stop_tol", 1e-9);
  cfg.prune_tol = obj.value("prune_tol", 1e-12);
  cfg.subproblem_tol = obj.value("subproblem_tol", 1e-12);
  cfg.rng_seed = obj.value("rng_seed", std::uint64_t{1});
  if (obj.contains("reference_objective"))
    cfg.reference_objective = obj.at("reference_objective").get<double>();
  if (seed_override) cfg.rng_seed = *seed_override;
  cfg.validate();
  return cfg;
}

std::shared_ptr<ProblemOracle> build_heat(const json& obj, std::uint64_t seed, json& meta) {
  check_keys(obj, {"n", "dt", "T", "beta", "noise_rel", "spikes"}, "heat");
  const int n = obj.value("n", 127);
  const double dt = require_positive(obj, "dt", "heat");
  const double T = require_positive(obj, "T", "heat");
  const double beta = require_positive(obj, "beta", "heat");
  const double noise_rel = obj.value("noise_rel", 0.0);
  if (noise_rel < 0.0) throw ConfigInvalid("heat.noise_rel must be nonnegative");

  std::vector<std::pair<std::pair<double, double>, double>> truth;
  if (!obj.contains("spikes")) throw ConfigInvalid("heat requires 'spikes'");
  for (const auto& s : obj.at("spikes")) {
    check_keys(s, {"x", "y", "coef"}, "heat.spikes[]");
    truth.push_back({{s.at("x").get<double>(), s.at("y").get<double>()},
                     s.at("coef").get<double>()});
  }

  auto grid = std::make_shared<HeatGrid>(n, dt, T);
  HeatDataset ds = make_dataset(truth, noise_rel, seed, *grid);
  meta["truth"] = json::array();
  for (const auto& [pos, coef] : truth)
    meta["truth"].push_back({{"x", pos.first}, {"y", pos.second}, {"coef", coef}});
  meta["noise_rel"] = ds.noise_rel;
  meta["seed"] = seed;
  return std::make_shared<HeatProblem>(grid, beta, ds.y_d);
}

std::shared_ptr<ProblemOracle> build_trace(const json& obj, std::uint64_t seed, json& meta) {
  check_keys(obj, {"n", "m", "ensemble", "beta", "beta_rel", "planted_coef", "noise_rel"},
             "trace");
  const int n = obj.value("n", 16);
  const int m = obj.value("m", 8 * n);
  const std::string ens = obj.value("ensemble", std::string("gaussian"));
  SensorEnsemble ensemble;
  if (ens == "gaussian")
    ensemble = SensorEnsemble::GaussianSymmetric;
  else if (ens == "rankone")
    ensemble = SensorEnsemble::RankOne;
  else
    throw ConfigInvalid("trace.ensemble must be 'gaussian' or 'rankone'");
  const double coef = obj.value("planted_coef", 1.0);
  const double noise_rel = obj.value("noise_rel", 0.0);

  TraceInstance inst;
  inst.n = n;
  inst.sensors = make_sensors(n, m, ensemble, seed);
  inst.beta = 0.0;

  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector h(n);
  for (int i = 0; i < n; ++i) h(i) = gauss(rng);
  h.normalize();
  inst.y_d.resize(m);
  for (int j = 0; j < m; ++j) inst.y_d(j) = coef * h.dot(inst.sensors[j] * h);
  if (noise_rel > 0.0) {
    Vector zeta(m);
    for (int j = 0; j < m; ++j) zeta(j) = gauss(rng);
    zeta *= noise_rel * inst.y_d.norm() / zeta.norm();
    inst.y_d += zeta;
  }

  if (obj.contains("beta") && obj.contains("beta_rel"))
    throw ConfigInvalid("trace: give either beta or beta_rel, not both");
  if (obj.contains("beta_rel")) {
    // Scale beta off the dual at zero so the solution is nonzero and the
    // optimal dual pins sigma1 = beta.
    const double rel = require_positive(obj, "beta_rel", "trace");
    if (!(rel < 1.0)) throw ConfigInvalid("trace.beta_rel must be in (0,1)");
    Matrix p0 = Matrix::Zero(n, n);
    for (int j = 0; j < m; ++j) p0 += inst.y_d(j) * inst.sensors[j];
    inst.beta = rel * jacobi_eigen(p0).values(0);
  } else {
    inst.beta = require_positive(obj, "beta", "trace");
  }

  meta["planted_coef"] = coef;
  meta["planted_h"] = std::vector<double>(h.data(), h.data() + n);
  meta["seed"] = seed;
  return std::make_shared<TraceProblem>(std::move(inst));
}

std::shared_ptr<ProblemOracle> build_mineffort(const json& obj, std::uint64_t seed, json& meta) {
  check_keys(obj, {"preset", "cells", "m", "operator", "alpha", "amp", "noise_rel"},
             "mineffort");
  EffortInstance inst;
  if (obj.value("preset", std::string()) == "twocell") {
    inst.cell_measure = Vector::Ones(2);
    inst.K = Matrix::Identity(2, 2);
    inst.alpha = 1.0;
    inst.y_d.resize(2);
    inst.y_d << 2.0, -2.0;
    meta["preset"] = "twocell";
    return std::make_shared<MinEffortProblem>(std::move(inst));
  }

  const int cells = obj.value("cells", 12);
  const int m = obj.value("m", 24);
  const std::string op = obj.value("operator", std::string("gaussian"));
  EffortOperator kind;
  if (op == "identity")
    kind = EffortOperator::Identity;
  else if (op == "gaussian")
    kind = EffortOperator::Gaussian;
  else if (op == "smoothing")
    kind = EffortOperator::Smoothing;
  else
    throw ConfigInvalid("mineffort.operator must be identity|gaussian|smoothing");
  inst.alpha = require_positive(obj, "alpha", "mineffort");
  const double amp = obj.value("amp", 1.0);
  const double noise_rel = obj.value("noise_rel", 0.0);

  inst.cell_measure = Vector::Ones(cells);
  inst.K = make_effort_operator(m, cells, kind, seed);
  std::mt19937_64 rng(seed + 1);
  Vector s(cells);
  for (int i = 0; i < cells; ++i) s(i) = (rng() & 1u) ? 1.0 : -1.0;
  inst.y_d = inst.K * (amp * s);
  if (noise_rel > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector zeta(m);
    for (int j = 0; j < m; ++j) zeta(j) = gauss(rng);
    zeta *= noise_rel * inst.y_d.norm() / zeta.norm();
    inst.y_d += zeta;
  }
  meta["truth_pattern"] = std::vector<double>(s.data(), s.data() + cells);
  meta["amp"] = amp;
  meta["seed"] = seed;
  return std::make_shared<MinEffortProblem>(std::move(inst));
}

}  // namespace

Experiment build_experiment(const json& config, std::optional<std::uint64_t> seed_override) {
  check_keys(config,
             {"experiment_id", "problem", "output_dir", "solver", "baseline", "heat", "trace",
              "mineffort"},
             "config");
  Experiment exp;
  if (!config.contains("experiment_id")) throw ConfigInvalid("config requires experiment_id");
  exp.id = config.at("experiment_id").get<std::string>();
  if (!config.contains("problem")) throw ConfigInvalid("config requires problem");
  exp.problem_kind = config.at("problem").get<std::string>();
  exp.output_dir = config.value("output_dir", std::string("out/") + exp.id);
  exp.solver = parse_solver(config.value("solver", json::object()), seed_override);

  for (const auto& kind : {"heat", "trace", "mineffort"})
    if (config.contains(kind) && exp.problem_kind != kind)
      throw ConfigInvalid(std::string("config block '") + kind +
                          "' does not match problem kind");

  json meta;
  const json block = config.value(exp.problem_kind, json::object());
  if (exp.problem_kind == "heat")
    exp.problem = build_heat(block, exp.solver.rng_seed, meta);
  else if (exp.problem_kind == "trace")
    exp.problem = build_trace(block, exp.solver.rng_seed, meta);
  else if (exp.problem_kind == "mineffort")
    exp.problem = build_mineffort(block, exp.solver.rng_seed, meta);
  else
    throw ConfigInvalid("problem must be heat|trace|mineffort");
  exp.meta = meta;

  if (config.contains("baseline")) {
    const json& b = config.at("baseline");
    check_keys(b, {"M0", "stepsize_rule", "max_iter"}, "baseline");
    BaselineConfig bc;
    bc.M0 = b.value("M0", 0.0);  // 0: derive J(0)/beta at run time
    const std::string rule = b.value("stepsize_rule", std::string("ExactLineSearch"));
    if (rule == "ExactLineSearch")
      bc.stepsize_rule = StepsizeRule::ExactLineSearch;
    else if (rule == "Harmonic")
      bc.stepsize_rule = StepsizeRule::Harmonic;
    else
      throw ConfigInvalid("baseline.stepsize_rule must be ExactLineSearch|Harmonic");
    bc.max_iter = b.value("max_iter", 100);
    bc.rng_seed = exp.solver.rng_seed;
    exp.baseline = bc;
  }
  return exp;
}

Experiment load_experiment(const std::filesystem::path& config_path,
                           std::optional<std::uint64_t> seed_override) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot read config " + config_path.string());
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config parse error: ") + e.what());
  }
  return build_experiment(config, seed_override);
}

double compute_reference_objective(const Experiment& exp) {
  if (exp.solver.reference_objective) return *exp.solver.reference_objective;
  SolverConfig ref = exp.solver;
  ref.max_iter = 100;
  ref.stop_tol = 1e-13;
  ref.reference_objective.reset();
  SolveResult res = solve(*exp.problem, ref);
  double best = objective(res.iterate, *exp.problem);
  for (const auto& r : res.records) best = std::min(best, r.objective);
  return best;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string telemetry_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream os;
  os << "k,objective,residual,active_size,insertion_value,wall_ms\n";
  for (const auto& r : records) {
    os << r.k << "," << fmt(r.objective) << ","
       << (r.residual ? fmt(*r.residual) : std::string()) << "," << r.active_size << ","
       << fmt(r.insertion_value) << "," << fmt(r.wall_ms) << "\n";
  }
  return os.str();
}

std::vector<IterationRecord> parse_telemetry_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) ||
      line != "k,objective,residual,active_size,insertion_value,wall_ms")
    throw IoError("telemetry CSV header mismatch");
  std::vector<IterationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    IterationRecord r;
    std::getline(ls, cell, ',');
    r.k = std::stoi(cell);
    std::getline(ls, cell, ',');
    r.objective = std::stod(cell);
    std::getline(ls, cell, ',');
    if (!cell.empty()) r.residual = std::stod(cell);
    std::getline(ls, cell, ',');
    r.active_size = std::stoi(cell);
    std::getline(ls, cell, ',');
    r.insertion_value = std::stod(cell);
    std::getline(ls, cell, ',');
    r.wall_ms = std::stod(cell);
    out.push_back(r);
  }
  return out;
}

json run_diagnostics(const ProblemOracle& problem, const SolveResult& result,
                     double reference_objective) {
  json rep;
  rep["termination"] = to_string(result.reason);
  rep["iterations"] = result.records.size();
  rep["reference_objective"] = reference_objective;

  const double final_obj = objective(result.iterate, problem);
  rep["final_objective"] = final_obj;
  rep["final_residual"] = final_obj - reference_objective;
  rep["active_size"] = result.iterate.size();

  auto fo = verify_first_order(result.iterate, problem, 1e-6);
  rep["first_order"] = {{"pass", fo.pass},
                        {"insertion_value", fo.insertion_value},
                        {"pairing_slack", fo.pairing_slack}};

  double pin_worst_ratio = 0.0;
  bool pin_pass = true;
  for (const auto& p : result.pinning) {
    if (p.tol_used <= 0.0) continue;
    pin_worst_ratio = std::max(pin_worst_ratio, p.max_deviation / p.tol_used);
    if (p.max_deviation > 10.0 * p.tol_used) pin_pass = false;
  }
  rep["pinning"] = {{"pass", pin_pass}, {"worst_ratio_vs_tol", pin_worst_ratio}};

  std::vector<double> objectives;
  std::vector<double> residual_u;
  for (const auto& r : result.records) {
    objectives.push_back(r.objective);
    residual_u.push_back(r.objective - reference_objective);
  }
  rep["monotone"] = verify_monotone(objectives, 1e-10);

  // Lifted view: with distinct atoms the measure objective coincides with J.
  MeasureView mv = MeasureView::from_iterate(result.iterate);
  const double lifted = mv.lifted_objective(problem);
  rep["lifted_objective_gap"] = std::abs(lifted - final_obj);
  auto dom = verify_residual_dominance(residual_u, residual_u);
  rep["residual_dominance"] = {{"pass", dom.pass}, {"equality", dom.equality}};

  rep["sublinear_c_hat"] = sublinear_bound_check(residual_u);
  try {
    auto fit = fit_linear_rate(residual_u, 0.5, rate_noise_floor(reference_objective));
    rep["rate_fit"] = {{"zeta_hat", fit.zeta_hat},
                       {"window_start", fit.window_start},
                       {"window_end", fit.window_end},
                       {"r_squared", fit.r_squared}};
  } catch (const InsufficientData&) {
    rep["rate_fit"] = nullptr;
  }

  const Vector y = result.iterate.forward(problem.observation_dim());
  const DualHandle dual = problem.dual(y);

  if (const auto* heat = dynamic_cast<const HeatProblem*>(&problem)) {
    json hj;
    const Vector& z0 = dual.vec;
    const double beta = heat->beta();
    hj["dual_max"] = z0.size() ? z0.cwiseAbs().maxCoeff() : 0.0;
    hj["dual_bound_pass"] = z0.cwiseAbs().maxCoeff() <= beta * (1.0 + 1e-6);
    json spikes = json::array();
    bool support_pass = true, nondegen_pass = true;
    for (size_t i = 0; i < result.iterate.atoms.size(); ++i) {
      const auto& a = result.iterate.atoms[i];
      const int node = static_cast<int>(a.payload(0));
      const double zval = std::abs(z0(node));
      if (zval < beta * (1.0 - 1e-6)) support_pass = false;
      json sj = {{"x", heat->grid().node_x(node)},
                 {"y", heat->grid().node_y(node)},
                 {"sign", static_cast<int>(a.payload(1))},
                 {"weight", result.iterate.weights[i]},
                 {"dual_abs", zval}};
      try {
        auto cr = heat->check_nondegeneracy(z0, node, 0.125);
        sj["gamma_hat"] = cr.gamma_hat;
        sj["growth_radius"] = cr.radius;
        sj["nondegenerate"] = cr.pass;
        if (!cr.pass) nondegen_pass = false;
      } catch (const BoundaryTooClose&) {
        sj["nondegenerate"] = false;
        nondegen_pass = false;
      }
      spikes.push_back(sj);
    }
    hj["support_pass"] = support_pass;
    hj["nondegeneracy_pass"] = nondegen_pass;
    hj["spikes"] = spikes;
    rep["heat"] = hj;
  } else if (const auto* trace = dynamic_cast<const TraceProblem*>(&problem)) {
    json tj;
    auto gap = trace->spectral_gap_check(dual.mat);
    tj["sigma1"] = gap.sigma1;
    tj["sigma2"] = gap.sigma2;
    tj["spectral_gap_pass"] = gap.pass;
    double wmax = 0.0, wtot = 0.0;
    int dominant = -1;
    for (size_t i = 0; i < result.iterate.weights.size(); ++i) {
      wtot += result.iterate.weights[i];
      if (result.iterate.weights[i] > wmax) {
        wmax = result.iterate.weights[i];
        dominant = static_cast<int>(i);
      }
    }
    tj["dominant_weight_fraction"] = wtot > 0.0 ? wmax / wtot : 0.0;
    if (dominant >= 0) {
      auto gp = trace->growth_probe(dual.mat, result.iterate.atoms[dominant].payload, 1000,
                                    /*seed=*/2024);
      tj["growth_min_ratio"] = gp.min_growth_ratio;
      tj["lipschitz_max_ratio"] = gp.max_lipschitz_ratio;
      tj["growth_pass"] = gp.pass;
    }
    rep["trace"] = tj;
  } else if (const auto* eff = dynamic_cast<const MinEffortProblem*>(&problem)) {
    json mj;
    const Vector& p = dual.vec;
    const Vector u = eff->cell_values(result.iterate);
    const auto& inst = eff->instance();
    const double dual_l1 = p.cwiseAbs().dot(inst.cell_measure);
    mj["dual_l1"] = dual_l1;
    mj["dual_feasible"] = dual_l1 <= inst.alpha * (1.0 + 1e-6);
    const double pairing = p.cwiseProduct(u).dot(inst.cell_measure);
    const double linf = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    mj["complementarity_gap"] =
        std::abs(pairing - inst.alpha * linf) / (1.0 + inst.alpha * linf);
    auto bin = eff->binariness_check(u, p, 1e-3);
    mj["binariness"] = {{"pass", bin.pass},
                        {"lambda_hat", bin.lambda_hat},
                        {"worst_relative_gap", bin.worst_relative_gap}};
    json sweep = json::array();
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1})
      sweep.push_back({{"eps", eps},
                       {"measure", eff->smallvalue_measure(p, eps)},
                       {"c_hat", eff->smallvalue_measure(p, eps) / eps}});
    mj["smallvalue_sweep"] = sweep;
    rep["mineffort"] = mj;
  }
  return rep;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

}  // namespace

RunArtifacts run_experiment(const Experiment& exp, bool quiet) {
  std::filesystem::create_directories(exp.output_dir);

  RunArtifacts art;
  art.reference_objective = compute_reference_objective(exp);
  SolverConfig cfg = exp.solver;
  cfg.reference_objective = art.reference_objective;
  art.result = solve(*exp.problem, cfg);

  art.telemetry_csv = exp.output_dir / "telemetry.csv";
  write_file(art.telemetry_csv, telemetry_csv(art.result.records));

  std::ostringstream atoms;
  atoms << exp.problem->atom_csv_header() << "\n";
  for (size_t i = 0; i < art.result.iterate.atoms.size(); ++i)
    atoms << exp.problem->atom_csv_row(art.result.iterate.atoms[i],
                                       art.result.iterate.weights[i])
          << "\n";
  art.atoms_csv = exp.output_dir / "atoms.csv";
  write_file(art.atoms_csv, atoms.str());

  art.verification = run_diagnostics(*exp.problem, art.result, art.reference_objective);
  art.verification["experiment_id"] = exp.id;
  art.verification["seed"] = exp.solver.rng_seed;
  art.verification["meta"] = exp.meta;
  write_file(exp.output_dir / "verification.json", art.verification.dump(2) + "\n");

  if (!quiet) {
    std::printf("[%s] %s after %zu iterations, residual %.3e\n", exp.id.c_str(),
                to_string(art.result.reason), art.result.records.size(),
                art.verification["final_residual"].get<double>());
  }
  return art;
}

CompareArtifacts compare_experiment(const Experiment& exp, bool quiet) {
  if (!exp.baseline) throw ConfigInvalid("compare requires a baseline block");
  CompareArtifacts art;
  art.fcgcg = run_experiment(exp, quiet);

  BaselineConfig bc = *exp.baseline;
  if (!(bc.M0 > 0.0)) {
    // Default gauge cap: F(0) equals J(0) and a unit-gauge atom costs 1, so
    // J(0) itself bounds the gauge of any minimizer and is the natural cap.
    bc.M0 = exp.problem->loss_eval(Vector::Zero(exp.problem->observation_dim()));
  }
  bc.reference_objective = art.fcgcg.reference_objective;
  bc.validate();
  art.baseline = gcg_solve(*exp.problem, bc);
  write_file(exp.output_dir / "gcg_telemetry.csv", telemetry_csv(art.baseline.records));

  // Side-by-side residual and cumulative wall-clock table.
  std::ostringstream side;
  side << "k,fcgcg_residual,fcgcg_time_ms,gcg_residual,gcg_time_ms\n";
  double t_fc = 0.0, t_gcg = 0.0;
  const size_t rows = std::max(art.fcgcg.result.records.size(), art.baseline.records.size());
  for (size_t k = 0; k < rows; ++k) {
    side << k << ",";
    if (k < art.fcgcg.result.records.size()) {
      t_fc += art.fcgcg.result.records[k].wall_ms;
      side << fmt(art.fcgcg.result.records[k].residual.value_or(0.0)) << "," << fmt(t_fc);
    } else {
      side << ",";
    }
    side << ",";
    if (k < art.baseline.records.size()) {
      t_gcg += art.baseline.records[k].wall_ms;
      side << fmt(art.baseline.records[k].residual.value_or(0.0)) << "," << fmt(t_gcg);
    } else {
      side << ",";
    }
    side << "\n";
  }
  write_file(exp.output_dir / "compare.csv", side.str());

  json summary;
  summary["experiment_id"] = exp.id;
  summary["fcgcg"] = {{"termination", to_string(art.fcgcg.result.reason)},
                      {"iterations", art.fcgcg.result.records.size()},
                      {"final_residual", art.fcgcg.verification["final_residual"]}};
  std::vector<double> res_gcg;
  for (const auto& r : art.baseline.records) res_gcg.push_back(r.residual.value_or(0.0));
  summary["gcg"] = {{"iterations", art.baseline.records.size()},
                    {"final_residual", res_gcg.empty() ? 0.0 : res_gcg.back()}};
  if (res_gcg.size() > 20) summary["gcg"]["residual_at_20"] = res_gcg[20];

  const double floor = rate_noise_floor(art.fcgcg.reference_objective);
  std::vector<double> res_fc;
  for (const auto& r : art.fcgcg.result.records) res_fc.push_back(r.residual.value_or(0.0));
  try {
    auto fit = fit_linear_rate(res_fc, 0.5, floor);
    summary["fcgcg"]["zeta_hat"] = fit.zeta_hat;
  } catch (const InsufficientData&) {
    summary["fcgcg"]["zeta_hat"] = nullptr;
  }
  try {
    auto fit = fit_linear_rate(res_gcg, 0.5, floor);
    summary["gcg"]["zeta_hat"] = fit.zeta_hat;
  } catch (const InsufficientData&) {
    summary["gcg"]["zeta_hat"] = nullptr;
  }
  write_file(exp.output_dir / "compare_summary.json", summary.dump(2) + "\n");
  art.summary = summary;
  return art;
}

json verify_csv(const std::filesystem::path& telemetry_path) {
  std::ifstream in(telemetry_path);
  if (!in) throw IoError("cannot read " + telemetry_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto records = parse_telemetry_csv(buf.str());
  if (records.empty()) throw IoError("telemetry CSV is empty");

  json rep;
  rep["file"] = telemetry_path.string();
  rep["iterations"] = records.size();
  std::vector<double> objectives, residuals;
  double best = records.front().objective;
  for (const auto& r : records) {
    objectives.push_back(r.objective);
    if (r.residual) residuals.push_back(*r.residual);
    best = std::min(best, r.objective);
  }
  rep["monotone"] = verify_monotone(objectives, 1e-10);
  if (!residuals.empty()) {
    rep["sublinear_c_hat"] = sublinear_bound_check(residuals);
    try {
      auto fit = fit_linear_rate(residuals, 0.5, rate_noise_floor(best));
      rep["rate_fit"] = {{"zeta_hat", fit.zeta_hat}, {"r_squared", fit.r_squared}};
    } catch (const InsufficientData&) {
      rep["rate_fit"] = nullptr;
    }
  }
  return rep;
}

void emit_plot_script(const std::vector<std::filesystem::path>& telemetry_paths,
                      const std::filesystem::path& script_path) {
  for (const auto& p : telemetry_paths)
    if (!std::filesystem::exists(p)) throw IoError("missing telemetry CSV " + p.string());

  std::ostringstream os;
  os << "# gnuplot script: residual vs k, residual vs time, active-set size vs k\n"
     << "set datafile separator ','\n"
     << "set terminal pngcairo size 1500,450\n"
     << "set output 'convergence.png'\n"
     << "set multiplot layout 1,3\n";
  auto curves = [&](const std::string& using_expr, const std::string& title_prefix) {
    std::string s;
    for (size_t i = 0; i < telemetry_paths.size(); ++i) {
      s += (i ? ", " : "") + std::string("'") + telemetry_paths[i].string() + "' skip 1 using " +
           using_expr + " with linespoints title '" + title_prefix +
           std::to_string(i) + "'";
    }
    return s;
  };
  os << "set logscale y\nset xlabel 'k'\nset ylabel 'r_J(u_k)'\n"
     << "plot " << curves("1:3", "run ") << "\n";
  os << "set xlabel 'time [s]'\n";
  for (size_t i = 0; i < telemetry_paths.size(); ++i) os << "t" << i << "=0\n";
  {
    std::string s;
    for (size_t i = 0; i < telemetry_paths.size(); ++i) {
      s += (i ? ", " : "") + std::string("'") + telemetry_paths[i].string() + "' skip 1 using (t" +
           std::to_string(i) + "=t" + std::to_string(i) + "+$6/1000.0):3 with linespoints title 'run " +
           std::to_string(i) + "'";
    }
    os << "plot " << s << "\n";
  }
  os << "unset logscale y\nset xlabel 'k'\nset ylabel 'active set size'\n"
     << "plot " << curves("1:4", "run ") << "\n"
     << "unset multiplot\n";
  write_file(script_path, os.str());
}

json default_config(const std::string& problem_kind) {
  if (problem_kind == "heat") {
    return json{
        {"experiment_id", "heat_414"},
        {"problem", "heat"},
        {"output_dir", "out/heat_414"},
        {"heat",
         {{"n", 127},
          {"dt", 0.001},
          {"T", 0.1},
          {"beta", 0.001},
          {"noise_rel", 0.1},
          {"spikes",
           json::array({{{"x", 0.75}, {"y", 0.75}, {"coef", 25.0}},
                        {{"x", 0.25}, {"y", 0.25}, {"coef", -10.0}}})}}},
        {"solver",
         {{"max_iter", 30}, {"stop_tol", 1e-9}, {"prune_tol", 1e-12},
          {"subproblem_tol", 1e-12}, {"rng_seed", 3}}},
        {"baseline", {{"stepsize_rule", "ExactLineSearch"}, {"max_iter", 40}}}};
  }
  if (problem_kind == "trace") {
    return json{{"experiment_id", "trace_d1"},
                {"problem", "trace"},
                {"output_dir", "out/trace_d1"},
                {"trace",
                 {{"n", 16}, {"m", 128}, {"ensemble", "gaussian"}, {"beta_rel", 0.25},
                  {"planted_coef", 1.0}}},
                {"solver",
                 {{"max_iter", 200}, {"stop_tol", 1e-9}, {"rng_seed", 7}}}};
  }
  if (problem_kind == "mineffort") {
    return json{{"experiment_id", "mineffort_twocell"},
                {"problem", "mineffort"},
                {"output_dir", "out/mineffort_twocell"},
                {"mineffort", {{"preset", "twocell"}}},
                {"solver", {{"max_iter", 20}, {"stop_tol", 1e-9}, {"rng_seed", 3}}}};
  }
  throw ConfigInvalid("unknown problem kind " + problem_kind);
}

}  // namespace fcgcg
