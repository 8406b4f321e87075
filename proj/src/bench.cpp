#include "multireg/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "multireg/baselines.hpp"
#include "multireg/detail/format.hpp"
#include "multireg/errors.hpp"
#include "multireg/init.hpp"
#include "multireg/metrics.hpp"
#include "multireg/parallel.hpp"
#include "multireg/serialization.hpp"

namespace multireg {

using nlohmann::json;

namespace {

template <typename T>
T param_or(const json& params, const char* field, T fallback) {
  if (!params.is_object() || !params.contains(field)) return fallback;
  try {
    return params.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("params.") + field + ": wrong type");
  }
}

EmParams em_params_from(const json& params, bool distance_term) {
  EmParams p;
  p.tau = param_or(params, "tau", p.tau);
  p.m_min = param_or(params, "m_min", p.m_min);
  p.t_iters = param_or(params, "t_iters", p.t_iters);
  p.sigma_floor = param_or(params, "sigma_floor", p.sigma_floor);
  p.outlier_density = param_or(params, "outlier_density", p.outlier_density);
  p.outlier_prior = param_or(params, "outlier_prior", p.outlier_prior);
  p.use_distance_term = distance_term;
  return p;
}

}  // namespace

Labeling make_init_labeling(const std::string& init, const CorrespondenceSet& corrs) {
  if (init == "gt") {
    if (!corrs.gt_labels) throw ConfigError("init 'gt': correspondences carry no gt labels");
    return Labeling(*corrs.gt_labels);
  }
  const auto colon = init.find(':');
  const std::string kind = init.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : init.substr(colon + 1);
  if (kind == "euclidean") {
    long target = 0;
    if (!detail::parse_long(arg, target) || target < 1)
      throw ConfigError("init 'euclidean:<target>': bad target '" + arg + "'");
    const auto points = corrs.source_points();
    return euclidean_clusters(points, static_cast<int>(target)).labeling;
  }
  if (kind == "labels") {
    if (arg.empty()) throw ConfigError("init 'labels:<file>': missing path");
    Labeling l = load_labels(arg);
    if (l.labels.size() != corrs.size())
      throw ConfigError("init labels cover " + std::to_string(l.labels.size()) +
                        " points, correspondences have " + std::to_string(corrs.size()));
    return l;
  }
  throw ConfigError("unknown init '" + init + "' (expected euclidean:<n>, labels:<file> or gt)");
}

MultiModelEstimate run_method(const std::string& method, const CorrespondenceSet& corrs,
                              const std::optional<Labeling>& init, const json& params,
                              std::uint64_t default_seed) {
  const auto seed = param_or<std::uint64_t>(params, "seed", default_seed);
  const auto need_init = [&]() -> const Labeling& {
    if (!init) throw ConfigError("method '" + method + "' requires an init labeling");
    return *init;
  };
  if (method == "em") return solve_em(corrs, need_init(), em_params_from(params, true), seed);
  if (method == "em-vanilla")
    return solve_em(corrs, need_init(), em_params_from(params, false), seed);
  if (method == "naive") return solve_naive(corrs, need_init());
  if (method == "tlinkage") {
    TlinkageParams p;
    p.tau_t = param_or(params, "tau_t", p.tau_t);
    p.merge_stop = param_or(params, "merge_stop", p.merge_stop);
    return solve_tlinkage(corrs, need_init(), p);
  }
  if (method == "sransac") {
    SransacParams p;
    p.inlier_threshold = param_or(params, "inlier_threshold", p.inlier_threshold);
    p.max_iterations = param_or(params, "max_iterations", p.max_iterations);
    p.min_inliers_to_continue =
        param_or(params, "min_inliers_to_continue", p.min_inliers_to_continue);
    p.seed = seed;
    return solve_sransac(corrs, p);
  }
  throw ConfigError("unknown method '" + method +
                    "' (expected em, em-vanilla, tlinkage, sransac or naive)");
}

BenchConfig bench_config_from_json(const json& j) {
  BenchConfig config;
  if (!j.contains("experiments") || !j.at("experiments").is_array() ||
      j.at("experiments").empty())
    throw ConfigError("experiments: required non-empty array");
  for (std::size_t i = 0; i < j.at("experiments").size(); ++i) {
    const auto& e = j.at("experiments")[i];
    const std::string where = "experiments[" + std::to_string(i) + "]";
    BenchExperiment exp;
    if (!e.contains("name")) throw ConfigError(where + ".name: required");
    exp.name = e.at("name").get<std::string>();
    if (!e.contains("scene")) throw ConfigError(where + ".scene: required");
    exp.scene = scene_spec_from_json(e.at("scene"));
    exp.init = param_or<std::string>(e, "init", exp.init);
    if (!e.contains("methods") || !e.at("methods").is_array() || e.at("methods").empty())
      throw ConfigError(where + ".methods: required non-empty array");
    exp.methods = e.at("methods").get<std::vector<std::string>>();
    if (e.contains("params")) exp.params = e.at("params");
    exp.trials = param_or(e, "trials", exp.trials);
    if (exp.trials < 1) throw ConfigError(where + ".trials: must be >= 1");
    exp.base_seed = param_or<std::uint64_t>(e, "base_seed", exp.base_seed);
    config.experiments.push_back(std::move(exp));
  }
  return config;
}

double quantile_type7(const std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) throw EmptySet("quantile_type7: no values");
  const auto n = sorted_values.size();
  if (n == 1) return sorted_values[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted_values[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

namespace {

struct TrialResult {
  bool ok = false;
  MetricsReport report;
  std::string error;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

TrialResult run_trial(const BenchExperiment& exp, const std::string& method, int trial) {
  TrialResult result;
  result.seed = exp.base_seed + static_cast<std::uint64_t>(trial);
  try {
    SceneSpec scene = exp.scene;
    scene.seed = result.seed;
    const CorrespondenceSet corrs = generate_scene(scene);
    std::optional<Labeling> init;
    if (method != "sransac") init = make_init_labeling(exp.init, corrs);
    const json params = exp.params.is_object() && exp.params.contains(method)
                            ? exp.params.at(method)
                            : json::object();
    const auto start = std::chrono::steady_clock::now();
    const MultiModelEstimate estimate = run_method(method, corrs, init, params, result.seed);
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report = compute_report(corrs, estimate);
    result.ok = true;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

const std::array<const char*, 4> kMetricNames{"iou", "per_point_error", "rotation_error",
                                              "translation_error"};

double metric_value(const MetricsReport& r, std::size_t metric) {
  switch (metric) {
    case 0: return r.iou;
    case 1: return r.per_point_error;
    case 2: return r.rotation_error;
    default: return r.translation_error;
  }
}

}  // namespace

BenchOutcome run_bench(const BenchConfig& config, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw FileError("cannot create output directory " + out_dir.string());

  struct RowKey {
    std::string experiment;
    std::string method;
    auto operator<=>(const RowKey&) const = default;
  };
  std::map<RowKey, std::vector<TrialResult>> rows;

  BenchOutcome outcome;
  for (const auto& exp : config.experiments) {
    for (const auto& method : exp.methods) {
      std::vector<TrialResult> results(static_cast<std::size_t>(exp.trials));
      parallel_chunks(static_cast<std::size_t>(exp.trials),
                      [&](std::size_t begin, std::size_t end) {
                        for (std::size_t t = begin; t < end; ++t)
                          results[t] = run_trial(exp, method, static_cast<int>(t));
                      });

      const fs::path dir = out_dir / exp.name / method;
      fs::create_directories(dir, ec);
      if (ec) throw FileError("cannot create " + dir.string());
      for (std::size_t t = 0; t < results.size(); ++t) {
        const auto& r = results[t];
        json doc;
        if (r.ok) {
          doc = report_to_json(r.report);
          doc["wall_time_s"] = r.wall_time_s;
        } else {
          doc["error"] = r.error;
        }
        doc["experiment"] = exp.name;
        doc["method"] = method;
        doc["trial"] = t;
        doc["seed"] = r.seed;
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%05zu.json", t);
        std::ofstream out(dir / name);
        out << doc.dump(2) << '\n';
        if (!out) throw FileError("failed writing " + (dir / name).string());
        ++outcome.trials_run;
        if (!r.ok) ++outcome.trials_failed;
      }
      rows[{exp.name, method}] = std::move(results);
    }
  }

  // summary.csv: per-metric means over successful trials.
  {
    std::ofstream out(out_dir / "summary.csv");
    out << "experiment,method,trials,failures,mean_iou,mean_per_point_error,"
           "mean_rotation_error,mean_translation_error\n";
    for (const auto& [key, results] : rows) {
      double sums[4] = {0, 0, 0, 0};
      int ok = 0;
      for (const auto& r : results) {
        if (!r.ok) continue;
        ++ok;
        for (std::size_t metric = 0; metric < 4; ++metric)
          sums[metric] += metric_value(r.report, metric);
      }
      out << key.experiment << ',' << key.method << ',' << results.size() << ','
          << results.size() - static_cast<std::size_t>(ok);
      for (std::size_t metric = 0; metric < 4; ++metric) {
        out << ',';
        out << (ok > 0 ? detail::format_double(sums[metric] / ok) : "nan");
      }
      out << '\n';
    }
    if (!out) throw FileError("failed writing summary.csv");
  }

  // boxplot.csv: five-number summaries with type-7 quantiles.
  {
    std::ofstream out(out_dir / "boxplot.csv");
    out << "experiment,method,metric,min,q1,median,q3,max\n";
    for (const auto& [key, results] : rows) {
      for (std::size_t metric = 0; metric < 4; ++metric) {
        std::vector<double> values;
        for (const auto& r : results)
          if (r.ok) values.push_back(metric_value(r.report, metric));
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        out << key.experiment << ',' << key.method << ',' << kMetricNames[metric];
        for (const double p : {0.0, 0.25, 0.5, 0.75, 1.0})
          out << ',' << detail::format_double(quantile_type7(values, p));
        out << '\n';
      }
    }
    if (!out) throw FileError("failed writing boxplot.csv");
  }
  return outcome;
}

}  // namespace multireg
