// Command-line driver: scene generation, solving, evaluation and benchmark
// sweeps. Exit codes: 0 success, 2 usage/config error, 3 solver failure,
// 4 evaluation mismatch, 1 unexpected.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "multireg/baselines.hpp"
#include "multireg/bench.hpp"
#include "multireg/errors.hpp"
#include "multireg/metrics.hpp"
#include "multireg/scenegen.hpp"
#include "multireg/serialization.hpp"

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw multireg::ConfigError(what + ": " + e.what());
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw multireg::FileError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_json_text(text, path);
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw multireg::FileError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw multireg::FileError("failed writing " + path);
}

int run_generate(const std::string& spec_path, const std::string& out_path) {
  const multireg::SceneSpec spec = multireg::scene_spec_from_json(load_json_file(spec_path));
  const multireg::CorrespondenceSet corrs = multireg::generate_scene(spec);
  multireg::save_correspondences(out_path, corrs);
  const std::string gt_path = multireg::ground_truth_path_for(out_path);
  write_json_file(gt_path, multireg::ground_truth_to_json(corrs, spec.noise_sigma, spec.seed));
  std::cout << "wrote " << corrs.size() << " correspondences to " << out_path
            << " (ground truth: " << gt_path << ")\n";
  return 0;
}

int run_solve(const std::string& method, const std::string& in_path,
              const std::string& init_spec, const std::string& params_text,
              const std::string& out_path, std::uint64_t seed) {
  const multireg::CorrespondenceSet corrs = multireg::load_correspondences(in_path);
  std::optional<multireg::Labeling> init;
  if (!init_spec.empty()) init = multireg::make_init_labeling(init_spec, corrs);
  if (method != "sransac" && !init)
    throw multireg::ConfigError("--init is required for method '" + method + "'");
  const json params =
      params_text.empty() ? json::object() : parse_json_text(params_text, "--params");

  const auto start = std::chrono::steady_clock::now();
  const multireg::MultiModelEstimate estimate =
      multireg::run_method(method, corrs, init, params, seed);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json doc = multireg::estimate_to_json(estimate);
  doc["method"] = method;
  doc["n"] = corrs.size();
  doc["wall_time_s"] = wall;
  write_json_file(out_path, doc);
  std::cout << method << ": " << estimate.hypotheses.size() << " clusters in "
            << estimate.iterations_run << " iterations (" << wall << " s)\n";
  return 0;
}

int run_evaluate(const std::string& in_path, const std::string& estimate_path,
                 const std::string& gt_path, const std::string& out_path) {
  multireg::CorrespondenceSet corrs = multireg::load_correspondences(in_path);
  const json est_doc = load_json_file(estimate_path);
  const multireg::MultiModelEstimate estimate = multireg::estimate_from_json(est_doc);
  if (estimate.labeling.labels.size() != corrs.size())
    throw multireg::NoClusters("estimate covers " +
                               std::to_string(estimate.labeling.labels.size()) +
                               " points, correspondences have " + std::to_string(corrs.size()));
  const std::string sidecar = gt_path.empty() ? multireg::ground_truth_path_for(in_path) : gt_path;
  multireg::ground_truth_from_json(load_json_file(sidecar), corrs);
  if (!corrs.gt_labels)
    throw multireg::NoClusters("correspondences carry no gt_label column; cannot evaluate");

  const multireg::MetricsReport report = multireg::compute_report(corrs, estimate);
  write_json_file(out_path, multireg::report_to_json(report));
  std::cout << "iou " << report.iou << ", per-point " << report.per_point_error << ", rotation "
            << report.rotation_error << ", translation " << report.translation_error << "\n";
  return 0;
}

int run_bench_cmd(const std::string& config_path, const std::string& out_dir) {
  const multireg::BenchConfig config =
      multireg::bench_config_from_json(load_json_file(config_path));
  const multireg::BenchOutcome outcome = multireg::run_bench(config, out_dir);
  std::cout << outcome.trials_run - outcome.trials_failed << "/" << outcome.trials_run
            << " trials succeeded; results in " << out_dir << "\n";
  if (outcome.trials_failed == outcome.trials_run) {
    std::cerr << "all trials failed\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multireg: multi-model 3D registration toolkit"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "generate a synthetic scene");
  std::string gen_spec, gen_out;
  generate->add_option("--spec", gen_spec, "scene spec JSON file")->required();
  generate->add_option("--out", gen_out, "output correspondences CSV")->required();

  auto* solve = app.add_subcommand("solve", "segment and estimate motions");
  std::string method, solve_in, solve_init, solve_params, solve_out;
  std::uint64_t solve_seed = 0;
  solve->add_option("--method", method, "em|em-vanilla|tlinkage|sransac|naive")->required();
  solve->add_option("--in", solve_in, "correspondences CSV")->required();
  solve->add_option("--init", solve_init, "euclidean:<target>|labels:<file>|gt");
  solve->add_option("--params", solve_params, "method parameters as inline JSON");
  solve->add_option("--seed", solve_seed, "seed for stochastic methods");
  solve->add_option("--out", solve_out, "output estimate JSON")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score an estimate against ground truth");
  std::string eval_in, eval_estimate, eval_gt, eval_out;
  evaluate->add_option("--in", eval_in, "correspondences CSV (with gt_label)")->required();
  evaluate->add_option("--estimate", eval_estimate, "estimate JSON")->required();
  evaluate->add_option("--gt", eval_gt, "ground-truth sidecar JSON (default <in>.gt.json)");
  evaluate->add_option("--out", eval_out, "output report JSON")->required();

  auto* bench = app.add_subcommand("bench", "run a benchmark sweep");
  std::string bench_config, bench_out;
  bench->add_option("--config", bench_config, "benchmark config JSON")->required();
  bench->add_option("--out-dir", bench_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  }

  try {
    if (*generate) return run_generate(gen_spec, gen_out);
    if (*solve) return run_solve(method, solve_in, solve_init, solve_params, solve_out, solve_seed);
    if (*evaluate) return run_evaluate(eval_in, eval_estimate, eval_gt, eval_out);
    if (*bench) return run_bench_cmd(bench_config, bench_out);
  } catch (const multireg::NoClusters& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const multireg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const multireg::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const multireg::CoverageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const multireg::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const multireg::Error& e) {
    // Solver-level failures (NoValidCluster, DegenerateInput, ...).
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
