#include <cmath>

#include "doctest.h"
#include "multireg/baselines.hpp"
#include "multireg/init.hpp"
#include "multireg/metrics.hpp"
#include "multireg/rng.hpp"
#include "multireg/scenegen.hpp"
#include "oracles.hpp"

using namespace multireg;

namespace {

SceneSpec two_object_scene(double sigma, std::uint64_t seed) {
  SceneSpec spec;
  spec.objects.push_back({"box", 120, 1.0, Point3{-3.0, 0.0, 0.0}});
  spec.objects.push_back({"sphere", 120, 1.0, Point3{3.0, 0.0, 0.0}});
  spec.noise_sigma = sigma;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("baselines");

TEST_CASE("preference function") {
  const double tau_t = 0.2;
  CHECK(preference(0.0, tau_t) == 1.0);
  CHECK(std::abs(preference(5.0 * tau_t, tau_t) - std::exp(-5.0)) <= 1e-15);
  CHECK(preference(5.000001 * tau_t, tau_t) == 0.0);

  // Monotone non-increasing and continuous up to the cutoff.
  double prev = 1.0;
  for (int i = 1; i <= 1000; ++i) {
    const double d = 5.0 * tau_t * i / 1000.0;
    const double v = preference(d, tau_t);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev == doctest::Approx(std::exp(-5.0)).epsilon(1e-12));
}

TEST_CASE("tanimoto distance") {
  const std::vector<double> u{1.0, 0.0};
  const std::vector<double> v{1.0, 1.0};
  const std::vector<double> w{0.0, 1.0};
  const std::vector<double> zero{0.0, 0.0};
  CHECK(tanimoto_distance(u, u) == 0.0);
  CHECK(tanimoto_distance(u, w) == 1.0);
  CHECK(tanimoto_distance(u, v) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tanimoto_distance(zero, zero) == 1.0);
}

TEST_CASE("naive: ground-truth init gives exact poses") {
  const CorrespondenceSet corrs = generate_scene(two_object_scene(0.0, 3));
  const MultiModelEstimate est = solve_naive(corrs, Labeling(*corrs.gt_labels));
  REQUIRE(est.hypotheses.size() == 2);
  const MetricsReport report = compute_report(corrs, est);
  CHECK(report.iou == 1.0);
  CHECK(report.per_point_error < 1e-10);
  CHECK(report.rotation_error < 1e-9);
  CHECK(report.translation_error < 1e-9);
}

TEST_CASE("naive: a split object yields two equal poses") {
  const CorrespondenceSet corrs = generate_scene(two_object_scene(0.0, 4));
  std::vector<int> init(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    init[i] = (*corrs.gt_labels)[i] == 0 ? (i % 2 == 0 ? 0 : 1) : 2;
  }
  const MultiModelEstimate est = solve_naive(corrs, Labeling(std::move(init)));
  REQUIRE(est.hypotheses.size() == 3);
  CHECK(angular_distance(est.hypotheses[0].pose.rotation(), est.hypotheses[1].pose.rotation()) <
        1e-9);
  CHECK((est.hypotheses[0].pose.translation() - est.hypotheses[1].pose.translation()).norm() <
        1e-9);
}

TEST_CASE("naive: clusters of size 2 become outliers") {
  const CorrespondenceSet corrs = generate_scene(two_object_scene(0.0, 5));
  std::vector<int> init(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) init[i] = (*corrs.gt_labels)[i];
  // Carve two points out of object 1 into their own cluster.
  init[corrs.size() - 1] = 2;
  init[corrs.size() - 2] = 2;
  const MultiModelEstimate est = solve_naive(corrs, Labeling(std::move(init)));
  CHECK(est.hypotheses.size() == 2);
  CHECK(est.labeling.labels[corrs.size() - 1] == Labeling::kOutlier);
  CHECK(est.labeling.labels[corrs.size() - 2] == Labeling::kOutlier);
}

TEST_CASE("sransac: two noiseless objects are recovered exactly") {
  const CorrespondenceSet corrs = generate_scene(two_object_scene(0.0, 6));
  SransacParams params;
  params.inlier_threshold = 0.01;
  params.seed = 1;
  const MultiModelEstimate est = solve_sransac(corrs, params);
  REQUIRE(est.hypotheses.size() == 2);

  // Each recovered consensus must coincide with one ground-truth cluster.
  for (int model = 0; model < 2; ++model) {
    int gt_of_model = -2;
    for (std::size_t i = 0; i < corrs.size(); ++i) {
      if (est.labeling.labels[i] != model) continue;
      if (gt_of_model == -2) gt_of_model = (*corrs.gt_labels)[i];
      CHECK((*corrs.gt_labels)[i] == gt_of_model);
    }
    for (std::size_t i = 0; i < corrs.size(); ++i) {
      if ((*corrs.gt_labels)[i] == gt_of_model) CHECK(est.labeling.labels[i] == model);
    }
    CHECK(angular_distance(est.hypotheses[static_cast<std::size_t>(model)].pose.rotation(),
                           corrs.gt_poses->at(gt_of_model).rotation()) < 1e-9);
  }
}

TEST_CASE("sransac: single object takes every point") {
  SceneSpec spec;
  spec.objects.push_back({"cylinder", 80, 1.0, Point3{0, 0, 0}});
  spec.seed = 7;
  const CorrespondenceSet corrs = generate_scene(spec);
  SransacParams params;
  params.inlier_threshold = 0.01;
  const MultiModelEstimate est = solve_sransac(corrs, params);
  REQUIRE(est.hypotheses.size() == 1);
  for (int l : est.labeling.labels) CHECK(l == 0);
}

TEST_CASE("sransac: unstructured points yield no model") {
  for (const std::uint64_t seed : {1, 2, 3}) {
    Rng rng(seed);
    CorrespondenceSet corrs;
    for (int i = 0; i < 30; ++i) {
      corrs.items.push_back({{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)},
                             {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)}});
    }
    SransacParams params;
    params.inlier_threshold = 1e-6;
    params.seed = seed;
    const MultiModelEstimate est = solve_sransac(corrs, params);
    CHECK(est.hypotheses.empty());
    for (int l : est.labeling.labels) CHECK(l == Labeling::kOutlier);
  }
}

TEST_CASE("sransac: deterministic and label-partitioned") {
  const CorrespondenceSet corrs = generate_scene(two_object_scene(0.02, 8));
  SransacParams params;
  params.inlier_threshold = 0.1;
  params.seed = 9;
  const MultiModelEstimate a = solve_sransac(corrs, params);
  const MultiModelEstimate b = solve_sransac(corrs, params);
  CHECK(a.labeling.labels == b.labeling.labels);
  for (std::size_t j = 0; j < a.hypotheses.size(); ++j)
    CHECK((a.hypotheses[j].pose.translation() - b.hypotheses[j].pose.translation()).norm() == 0.0);
}

TEST_CASE("tlinkage: a single init cluster is returned unchanged") {
  const CorrespondenceSet corrs = generate_scene(two_object_scene(0.0, 10));
  std::vector<int> init(corrs.size(), 0);
  const MultiModelEstimate est = solve_tlinkage(corrs, Labeling(std::move(init)), TlinkageParams{});
  CHECK(est.hypotheses.size() == 1);
  for (int l : est.labeling.labels) CHECK(l == 0);
}

TEST_CASE("tlinkage: fragments of one rigid object merge") {
  SceneSpec spec;
  spec.objects.push_back({"box", 90, 1.0, Point3{0, 0, 0}});
  spec.seed = 11;
  const CorrespondenceSet corrs = generate_scene(spec);
  std::vector<int> init(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) init[i] = i % 2 == 0 ? 0 : 1;
  const MultiModelEstimate est = solve_tlinkage(corrs, Labeling(std::move(init)), TlinkageParams{});
  CHECK(est.hypotheses.size() == 1);
}

TEST_CASE("tlinkage: motions past the preference cutoff never merge") {
  // Identical rotations, translations 1.05 m apart: every cross-residual sits
  // beyond 5 tau_t = 1 m, so cross-preferences are zero.
  Rng rng(12);
  const Eigen::Matrix3d rot = rng.random_rotation();
  const RigidTransform pose_a(rot, {0.0, 0.0, 0.0});
  const RigidTransform pose_b(rot, {1.05, 0.0, 0.0});
  CorrespondenceSet corrs;
  std::vector<int> init;
  for (int i = 0; i < 60; ++i) {
    const Point3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const bool first = i < 30;
    corrs.items.push_back({p, apply(first ? pose_a : pose_b, p)});
    init.push_back(i / 15);  // two fragments per object
  }
  const MultiModelEstimate est = solve_tlinkage(corrs, Labeling(std::move(init)), TlinkageParams{});
  CHECK(est.hypotheses.size() == 2);
  for (int i = 0; i < 30; ++i) CHECK(est.labeling.labels[i] == est.labeling.labels[0]);
  for (int i = 30; i < 60; ++i) CHECK(est.labeling.labels[i] == est.labeling.labels[30]);
  CHECK(est.labeling.labels[0] != est.labeling.labels[30]);
}

TEST_SUITE_END();
