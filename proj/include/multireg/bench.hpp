#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "multireg/em.hpp"
#include "multireg/scenegen.hpp"

namespace multireg {

/// Builds the initial labeling named by an init spec: "euclidean:<target>",
/// "labels:<csv path>" or "gt" (ground-truth labels carried by the set).
Labeling make_init_labeling(const std::string& init, const CorrespondenceSet& corrs);

/// Dispatches one solver (em, em-vanilla, tlinkage, sransac, naive) with a
/// method-specific JSON parameter object; absent fields keep their defaults.
/// default_seed seeds stochastic methods unless the params carry "seed".
MultiModelEstimate run_method(const std::string& method, const CorrespondenceSet& corrs,
                              const std::optional<Labeling>& init,
                              const nlohmann::json& params, std::uint64_t default_seed);

struct BenchExperiment {
  std::string name;
  SceneSpec scene;  // per-trial seed is base_seed + trial index
  std::string init = "euclidean:100";  // "euclidean:<target>" or "gt"
  std::vector<std::string> methods;    // em, em-vanilla, tlinkage, sransac, naive
  nlohmann::json params;               // optional per-method parameter objects
  int trials = 1;
  std::uint64_t base_seed = 0;
};

struct BenchConfig {
  std::vector<BenchExperiment> experiments;
};

BenchConfig bench_config_from_json(const nlohmann::json& j);

struct BenchOutcome {
  int trials_run = 0;
  int trials_failed = 0;
};

/// Runs every experiment x method x trial, writing one MetricsReport JSON per
/// trial under out_dir/<experiment>/<method>/, then summary.csv (per-method
/// metric means) and boxplot.csv (type-7 quantile five-number summaries).
/// Trials run concurrently; outputs are byte-identical for any thread count.
/// Per-trial failures are recorded in the trial file and skipped in the
/// aggregates.
BenchOutcome run_bench(const BenchConfig& config, const std::filesystem::path& out_dir);

/// Linear-interpolation (type-7) quantile of sorted values, p in [0, 1].
double quantile_type7(const std::vector<double>& sorted_values, double p);

}  // namespace multireg
