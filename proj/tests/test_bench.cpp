#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "multireg/bench.hpp"
#include "multireg/errors.hpp"
#include "multireg/serialization.hpp"
#include "oracles.hpp"

using namespace multireg;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_bench_config() {
  return json::parse(R"({
    "experiments": [{
      "name": "exp1",
      "scene": {
        "objects": [
          {"source": "box", "count": 120, "diameter": 1.0},
          {"source": "sphere", "count": 120, "diameter": 1.0},
          {"source": "cylinder", "count": 120, "diameter": 1.0}
        ],
        "noise_sigma": 0.02
      },
      "init": "euclidean:9",
      "methods": ["em", "naive", "sransac"],
      "params": {"sransac": {"inlier_threshold": 0.1}},
      "trials": 4,
      "base_seed": 500
    }]
  })");
}

}  // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(quantile_type7(v, 0.75) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(quantile_type7(v, 1.0) == 4.0);
  CHECK(quantile_type7({7.5}, 0.4) == 7.5);
  CHECK_THROWS_AS(quantile_type7({}, 0.5), EmptySet);
}

TEST_CASE("pose and estimate serialization round-trips") {
  Rng rng(3);
  MultiModelEstimate est;
  for (int j = 0; j < 3; ++j) {
    Hypothesis h;
    h.pose = RigidTransform(rng.random_rotation(), {rng.uniform(-2, 2), 0.5, -1.0});
    h.sigma = 0.01 * (j + 1);
    h.weight = 0.25;
    h.centroid = {1.0, 2.0, 3.0};
    est.hypotheses.push_back(h);
  }
  est.labeling.labels = {0, 0, 1, 2, -1, 1};
  est.iterations_run = 4;

  const MultiModelEstimate back = estimate_from_json(estimate_to_json(est));
  CHECK(back.labeling.labels == est.labeling.labels);
  CHECK(back.iterations_run == 4);
  REQUIRE(back.hypotheses.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK((back.hypotheses[j].pose.rotation() - est.hypotheses[j].pose.rotation())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    CHECK(back.hypotheses[j].sigma == est.hypotheses[j].sigma);
  }
}

TEST_CASE("estimate labels must reference hypotheses") {
  json doc = estimate_to_json(MultiModelEstimate{});
  doc["labels"] = std::vector<int>{0};
  CHECK_THROWS_AS(estimate_from_json(doc), ConfigError);
}

TEST_CASE("scene spec errors name the field") {
  try {
    scene_spec_from_json(json::parse(R"({"noise_sigma": 0.1})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("objects") != std::string::npos);
  }
  try {
    scene_spec_from_json(json::parse(R"({"objects": [{"count": 5}]})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("source") != std::string::npos);
  }
}

TEST_CASE("bench reruns are byte-identical and quartiles check out") {
  const oracles::ScratchDir dir("bench");
  const BenchConfig config = bench_config_from_json(small_bench_config());

  const auto dir_a = dir.path() / "a";
  const auto dir_b = dir.path() / "b";
  const BenchOutcome outcome = run_bench(config, dir_a);
  CHECK(outcome.trials_run == 12);
  CHECK(outcome.trials_failed == 0);
  run_bench(config, dir_b);

  CHECK(slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv"));
  CHECK(slurp(dir_a / "boxplot.csv") == slurp(dir_b / "boxplot.csv"));

  // Recompute the em iou quartiles from the per-trial reports.
  std::vector<double> ious;
  for (int t = 0; t < 4; ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%05d.json", t);
    const json doc = json::parse(slurp(dir_a / "exp1" / "em" / name));
    REQUIRE(!doc.contains("error"));
    ious.push_back(doc.at("iou").get<double>());
  }
  std::sort(ious.begin(), ious.end());
  const auto independent_q = [&](double p) {
    // Textbook linear interpolation on sorted samples.
    const double h = p * static_cast<double>(ious.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    return lo + 1 < ious.size() ? ious[lo] * (1.0 - frac) + ious[lo + 1] * frac : ious.back();
  };

  bool found = false;
  std::istringstream boxplot(slurp(dir_a / "boxplot.csv"));
  std::string line;
  while (std::getline(boxplot, line)) {
    if (line.rfind("exp1,em,iou,", 0) != 0) continue;
    found = true;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 8);
    CHECK(std::stod(fields[3]) == doctest::Approx(independent_q(0.0)).epsilon(1e-12));
    CHECK(std::stod(fields[4]) == doctest::Approx(independent_q(0.25)).epsilon(1e-12));
    CHECK(std::stod(fields[5]) == doctest::Approx(independent_q(0.5)).epsilon(1e-12));
    CHECK(std::stod(fields[6]) == doctest::Approx(independent_q(0.75)).epsilon(1e-12));
    CHECK(std::stod(fields[7]) == doctest::Approx(independent_q(1.0)).epsilon(1e-12));
  }
  CHECK(found);
}

TEST_CASE("unknown method or init is a config error") {
  CorrespondenceSet corrs;
  corrs.items.push_back({{0, 0, 0}, {0, 0, 0}});
  CHECK_THROWS_AS(run_method("pearl", corrs, std::nullopt, json::object(), 0), ConfigError);
  CHECK_THROWS_AS(run_method("em", corrs, std::nullopt, json::object(), 0), ConfigError);
  CHECK_THROWS_AS(make_init_labeling("kmeans:5", corrs), ConfigError);
}

TEST_SUITE_END();
