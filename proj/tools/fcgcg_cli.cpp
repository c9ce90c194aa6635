#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fcgcg/errors.hpp"
#include "fcgcg/harness.hpp"

namespace {

int worker_count() {
  if (const char* env = std::getenv("ATOMIC_FCGCG_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Run `task` over each config path with a bounded worker pool.
// Returns the worst exit code observed.
int for_each_config(const std::vector<std::string>& configs,
                    const std::function<int(const std::string&)>& task) {
  const int workers = std::min<int>(worker_count(), static_cast<int>(configs.size()));
  std::atomic<size_t> next{0};
  std::atomic<int> worst{0};
  auto body = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      const int code = task(configs[i]);
      int cur = worst.load();
      while (code > cur && !worst.compare_exchange_weak(cur, code)) {
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  return worst.load();
}

int classify(const std::exception& e, bool quiet) {
  if (!quiet) std::fprintf(stderr, "error: %s\n", e.what());
  if (dynamic_cast<const fcgcg::ConfigInvalid*>(&e)) return 4;
  if (dynamic_cast<const fcgcg::IoError*>(&e)) return 5;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fully-corrective generalized conditional gradient solver"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_dir;
  std::string gen_kind;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", configs, "experiment config JSON file(s)");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "override output directory");
    sub->add_option("--seed", seed, "override solver rng seed");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* run = app.add_subcommand("run", "run FC-GCG on one or more configs");
  add_common(run, true);
  auto* compare = app.add_subcommand("compare", "run FC-GCG and the GCG baseline");
  add_common(compare, true);
  auto* verify = app.add_subcommand("verify", "re-check an archived telemetry CSV");
  std::vector<std::string> csvs;
  verify->add_option("--config", csvs, "telemetry CSV file(s)")->required();
  verify->add_flag("--quiet", quiet, "suppress progress output");
  auto* gen = app.add_subcommand("gen", "emit a default config document");
  gen->add_option("kind", gen_kind, "heat | trace | mineffort")->required();
  gen->add_option("--out", out_dir, "write config here instead of stdout");
  gen->add_flag("--quiet", quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const fcgcg::json doc = fcgcg::default_config(gen_kind);
      if (out_dir.empty()) {
        std::printf("%s\n", doc.dump(2).c_str());
      } else {
        std::ofstream f(out_dir);
        if (!f) throw fcgcg::IoError("cannot write " + out_dir);
        f << doc.dump(2) << "\n";
      }
      return 0;
    }
    if (verify->parsed()) {
      std::mutex io;
      return for_each_config(csvs, [&](const std::string& path) {
        try {
          const fcgcg::json rep = fcgcg::verify_csv(path);
          std::lock_guard<std::mutex> lock(io);
          if (!quiet) std::printf("%s\n", rep.dump(2).c_str());
          return 0;
        } catch (const std::exception& e) {
          return classify(e, quiet);
        }
      });
    }

    const bool with_baseline = compare->parsed();
    std::mutex io;
    return for_each_config(configs, [&](const std::string& path) {
      try {
        fcgcg::Experiment exp = fcgcg::load_experiment(path, seed);
        if (!out_dir.empty()) {
          exp.output_dir = configs.size() == 1
                               ? std::filesystem::path(out_dir)
                               : std::filesystem::path(out_dir) / exp.id;
        }
        if (with_baseline) {
          auto art = fcgcg::compare_experiment(exp, quiet);
          std::lock_guard<std::mutex> lock(io);
          return art.fcgcg.result.reason == fcgcg::TerminationReason::MaxIter ? 2 : 0;
        }
        auto art = fcgcg::run_experiment(exp, quiet);
        std::lock_guard<std::mutex> lock(io);
        return art.result.reason == fcgcg::TerminationReason::MaxIter ? 2 : 0;
      } catch (const std::exception& e) {
        return classify(e, quiet);
      }
    });
  } catch (const std::exception& e) {
    return classify(e, quiet);
  }
}
