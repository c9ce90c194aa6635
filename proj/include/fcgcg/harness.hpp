#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fcgcg/gcg.hpp"
#include "fcgcg/problem.hpp"
#include "fcgcg/solver.hpp"

namespace fcgcg {

using json = nlohmann::json;

// A fully parsed experiment: problem oracle plus solver / baseline blocks.
struct Experiment {
  std::string id;
  std::string problem_kind;  // heat | trace | mineffort
  std::shared_ptr<ProblemOracle> problem;
  SolverConfig solver;
  std::optional<BaselineConfig> baseline;
  std::filesystem::path output_dir;
  json meta;  // dataset provenance: ground truth, seed, noise level
};

// Parse and schema-validate a config document; unknown keys are rejected.
// seed_override replaces the solver rng_seed (and reseeds the dataset).
Experiment build_experiment(const json& config, std::optional<std::uint64_t> seed_override);
Experiment load_experiment(const std::filesystem::path& config_path,
                           std::optional<std::uint64_t> seed_override);

struct RunArtifacts {
  SolveResult result;
  double reference_objective = 0.0;
  json verification;
  std::filesystem::path telemetry_csv;
  std::filesystem::path atoms_csv;
};

// Reference objective J*: smallest objective over a high-budget run
// (max_iter 100, tight stop tolerance), unless the config pinned one.
double compute_reference_objective(const Experiment& exp);

// Full pipeline: reference run, solve, diagnostics, CSV + report dump.
RunArtifacts run_experiment(const Experiment& exp, bool quiet);

struct CompareArtifacts {
  RunArtifacts fcgcg;
  SolveResult baseline;
  json summary;
};

// FC-GCG vs plain GCG on the identical dataset; writes side-by-side CSV and
// a summary with both rate fits.
CompareArtifacts compare_experiment(const Experiment& exp, bool quiet);

// Telemetry CSV schema: k,objective,residual,active_size,insertion_value,wall_ms.
std::string telemetry_csv(const std::vector<IterationRecord>& records);
std::vector<IterationRecord> parse_telemetry_csv(const std::string& text);

// Structural diagnostics on a finished solve (first-order, pinning,
// monotonicity, dominance, rates, problem-specific probes).
json run_diagnostics(const ProblemOracle& problem, const SolveResult& result,
                     double reference_objective);

// Offline re-verification of an archived telemetry CSV.
json verify_csv(const std::filesystem::path& telemetry_path);

// Plain gnuplot script reproducing the three-panel layout (residual vs k,
// residual vs time, active-set size vs k).
void emit_plot_script(const std::vector<std::filesystem::path>& telemetry_paths,
                      const std::filesystem::path& script_path);

// Default config documents for the CLI `gen` verb.
json default_config(const std::string& problem_kind);

}  // namespace fcgcg
