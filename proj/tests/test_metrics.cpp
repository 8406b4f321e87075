#include <cmath>

#include "doctest.h"
#include "multireg/errors.hpp"
#include "multireg/metrics.hpp"
#include "multireg/rng.hpp"
#include "oracles.hpp"

using namespace multireg;
using oracles::rot_z;

namespace {

Labeling labels(std::vector<int> v) { return Labeling(std::move(v)); }

std::vector<Point3> random_points(Rng& rng, int n, double extent) {
  std::vector<Point3> out;
  for (int i = 0; i < n; ++i)
    out.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                   rng.uniform(-extent, extent)});
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("match_clusters") {
  SUBCASE("identity") {
    const Labeling l = labels({0, 0, 1, 1, 2});
    const auto m = match_clusters(l, l);
    CHECK(m.at(0) == 0);
    CHECK(m.at(1) == 1);
    CHECK(m.at(2) == 2);
  }
  SUBCASE("majority overlap wins") {
    // est cluster 0 overlaps gt 0 by 7 points and gt 1 by 3.
    std::vector<int> est(10, 0), gt(10, 0);
    for (int i = 7; i < 10; ++i) gt[static_cast<std::size_t>(i)] = 1;
    CHECK(match_clusters(labels(std::move(est)), labels(std::move(gt))).at(0) == 0);
  }
  SUBCASE("ties break to the smallest gt id") {
    std::vector<int> est(10, 0), gt(10, 2);
    for (int i = 5; i < 10; ++i) gt[static_cast<std::size_t>(i)] = 1;
    // Intersections: gt 1 -> 5, gt 2 -> 5. Tie goes to gt 1.
    CHECK(match_clusters(labels(std::move(est)), labels(std::move(gt))).at(0) == 1);
  }
}

TEST_CASE("chamfer examples") {
  const std::vector<Point3> p{{0, 0, 0}, {2, 0, 0}};
  const std::vector<Point3> q{{1, 0, 0}};
  CHECK(chamfer(p, p) == 0.0);
  CHECK(chamfer(std::vector<Point3>{{0, 0, 0}}, q) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chamfer(p, q) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(chamfer(p, std::vector<Point3>{}), EmptySet);
}

TEST_CASE("chamfer agrees with the exhaustive oracle and is symmetric") {
  Rng rng(19);
  for (int round = 0; round < 20; ++round) {
    const int np = 1 + static_cast<int>(rng.uniform_index(200));
    const int nq = 1 + static_cast<int>(rng.uniform_index(200));
    const auto p = random_points(rng, np, 3.0);
    auto q = random_points(rng, nq, 3.0);
    // Cluster half of q tightly so grids see uneven densities.
    for (std::size_t i = 0; i < q.size() / 2; ++i) q[i] = 0.01 * q[i];
    const double lib = chamfer(p, q);
    CHECK(std::abs(lib - oracles::bf_chamfer(p, q)) < 1e-12);
    CHECK(std::abs(lib - chamfer(q, p)) < 1e-12);
  }
}

TEST_CASE("per_point_error examples") {
  Rng rng(23);
  // Two clusters of grid points, spacing 0.5.
  std::vector<Point3> source;
  std::vector<int> gt_labels;
  for (int c = 0; c < 2; ++c) {
    for (int x = 0; x < 4; ++x) {
      for (int y = 0; y < 4; ++y) {
        source.push_back({static_cast<double>(c) * 10.0 + 0.5 * x, 0.5 * y, 0.0});
        gt_labels.push_back(c);
      }
    }
  }
  PoseMap gt_poses;
  gt_poses.emplace(0, RigidTransform(rot_z(0.4), {1.0, 0.0, 0.0}));
  gt_poses.emplace(1, RigidTransform(rot_z(-0.2), {0.0, 2.0, 0.0}));

  SUBCASE("identical labels and poses give zero") {
    const Labeling l = labels(std::vector<int>(gt_labels));
    CHECK(per_point_error(source, l, gt_poses, l, gt_poses) == 0.0);
  }
  SUBCASE("translation offset below the point spacing is recovered exactly") {
    const double delta = 0.05;
    PoseMap est_poses;
    for (const auto& [k, pose] : gt_poses)
      est_poses.emplace(k, RigidTransform(pose.rotation(),
                                          pose.translation() + Point3{delta, 0.0, 0.0}));
    const Labeling l = labels(std::vector<int>(gt_labels));
    const double lib = per_point_error(source, l, gt_poses, l, est_poses);
    CHECK(lib == doctest::Approx(delta).epsilon(1e-12));

    // Brute-force verification of the same quantity.
    double bf = 0.0;
    for (int c = 0; c < 2; ++c) {
      std::vector<Point3> est_cloud, gt_cloud;
      for (std::size_t i = 0; i < source.size(); ++i) {
        if (gt_labels[i] != c) continue;
        est_cloud.push_back(apply(est_poses.at(c), source[i]));
        gt_cloud.push_back(apply(gt_poses.at(c), source[i]));
      }
      bf += oracles::bf_chamfer(est_cloud, gt_cloud);
    }
    bf /= 2.0;
    CHECK(lib == doctest::Approx(bf).epsilon(1e-12));
  }
  SUBCASE("small rotation about the centroid scales with mean radius") {
    // Single object centered at the origin.
    std::vector<Point3> cloud;
    std::vector<int> l;
    for (int i = 0; i < 100; ++i) {
      cloud.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0});
      l.push_back(0);
    }
    const double theta = 1e-3;
    PoseMap gt_p, est_p;
    gt_p.emplace(0, RigidTransform());
    est_p.emplace(0, RigidTransform(rot_z(theta), Point3::Zero()));
    const Labeling lab = labels(std::move(l));
    const double lib = per_point_error(cloud, lab, gt_p, lab, est_p);

    std::vector<Point3> est_cloud;
    for (const auto& p : cloud) est_cloud.push_back(apply(est_p.at(0), p));
    CHECK(lib == doctest::Approx(oracles::bf_chamfer(est_cloud, cloud)).epsilon(1e-12));
    double mean_radius = 0.0;
    for (const auto& p : cloud) mean_radius += p.norm();
    mean_radius /= static_cast<double>(cloud.size());
    CHECK(lib == doctest::Approx(theta * mean_radius).epsilon(0.35));
  }
}

TEST_CASE("pose_errors") {
  SUBCASE("exact match gives zero") {
    const Labeling l = labels({0, 0, 1, 1});
    PoseMap poses;
    poses.emplace(0, RigidTransform(rot_z(0.3), {1, 0, 0}));
    poses.emplace(1, RigidTransform(rot_z(-0.8), {0, 1, 0}));
    const auto r = pose_errors(l, poses, l, poses);
    CHECK(r.rotation_error == 0.0);
    CHECK(r.translation_error == 0.0);
  }
  SUBCASE("60/40 split weights the errors") {
    std::vector<int> gt(100, 0), est(100, 0);
    for (int i = 60; i < 100; ++i) gt[static_cast<std::size_t>(i)] = 1;
    PoseMap gt_poses, est_poses;
    est_poses.emplace(0, RigidTransform());
    gt_poses.emplace(0, RigidTransform(rot_z(0.1), Point3::Zero()));
    gt_poses.emplace(1, RigidTransform(rot_z(0.2), Point3::Zero()));
    const auto r = pose_errors(labels(std::move(gt)), gt_poses, labels(std::move(est)), est_poses);
    CHECK(r.rotation_error == doctest::Approx(0.14).epsilon(1e-9));
    double weight_sum = 0.0;
    for (const auto& p : r.pairs) weight_sum += p.weight;
    CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("est cluster inside one gt cluster sees the full translation gap") {
    std::vector<int> gt(20, 0);
    std::vector<int> est(20, Labeling::kOutlier);
    for (int i = 5; i < 15; ++i) est[static_cast<std::size_t>(i)] = 0;
    PoseMap gt_poses, est_poses;
    gt_poses.emplace(0, RigidTransform());
    est_poses.emplace(0, RigidTransform(Eigen::Matrix3d::Identity(), {0.5, 0, 0}));
    const auto r = pose_errors(labels(std::move(gt)), gt_poses, labels(std::move(est)), est_poses);
    CHECK(r.translation_error == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("iou examples") {
  SUBCASE("identity") {
    const Labeling l = labels({0, 0, 1, 1, 2, 2});
    CHECK(iou(l, l) == 1.0);
  }
  SUBCASE("one est cluster over two equal gt clusters") {
    std::vector<int> est(20, 0), gt(20, 0);
    for (int i = 10; i < 20; ++i) gt[static_cast<std::size_t>(i)] = 1;
    CHECK(iou(labels(std::move(est)), labels(std::move(gt))) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("one gt cluster split into two est halves") {
    std::vector<int> gt(10, 0), est(10, 0);
    for (int i = 5; i < 10; ++i) est[static_cast<std::size_t>(i)] = 1;
    CHECK(iou(labels(std::move(est)), labels(std::move(gt))) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("metrics are invariant to consistent relabeling") {
  Rng rng(29);
  std::vector<int> est, gt;
  for (int i = 0; i < 150; ++i) {
    est.push_back(static_cast<int>(rng.uniform_index(4)) - 1);
    gt.push_back(static_cast<int>(rng.uniform_index(4)) - 1);
  }
  Labeling le = labels(std::move(est)), lg = labels(std::move(gt));
  le.compact();
  lg.compact();

  // Permute est ids with the fixed cycle 0->1->2->0 and compare.
  Labeling permuted = le;
  for (int& l : permuted.labels)
    if (l >= 0) l = (l + 1) % 3;
  // Relabeling must go through compact() to stay in canonical form.
  const double direct = iou(le, lg);
  const double renamed = iou(permuted, lg);
  CHECK(direct == doctest::Approx(renamed).epsilon(1e-12));
}

TEST_CASE("randomized agreement with brute-force oracles") {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    const int n = 20 + static_cast<int>(rng.uniform_index(180));
    std::vector<int> est, gt;
    for (int i = 0; i < n; ++i) {
      est.push_back(static_cast<int>(rng.uniform_index(5)) - 1);
      gt.push_back(static_cast<int>(rng.uniform_index(4)) - 1);
    }
    Labeling le = labels(std::move(est)), lg = labels(std::move(gt));
    le.compact();
    lg.compact();
    if (le.cluster_count() == 0 || lg.cluster_count() == 0) continue;

    CHECK(match_clusters(le, lg) == oracles::bf_match(le, lg));
    CHECK(std::abs(iou(le, lg) - oracles::bf_iou(le, lg)) < 1e-12);

    PoseMap gt_poses, est_poses;
    for (int k = 0; k < lg.cluster_count(); ++k)
      gt_poses.emplace(k, RigidTransform(rng.random_rotation(),
                                         {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                          rng.uniform(-2, 2)}));
    for (int j = 0; j < le.cluster_count(); ++j)
      est_poses.emplace(j, RigidTransform(rng.random_rotation(),
                                          {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                           rng.uniform(-2, 2)}));
    const auto lib = pose_errors(lg, gt_poses, le, est_poses);
    const auto bf = oracles::bf_pose_errors(lg, gt_poses, le, est_poses);
    CHECK(std::abs(lib.rotation_error - bf.rotation) < 1e-12);
    CHECK(std::abs(lib.translation_error - bf.translation) < 1e-12);
    for (const auto& p : lib.pairs)
      CHECK(std::abs(p.weight - bf.weights.at({p.est, p.gt})) < 1e-12);
  }
}

TEST_CASE("no clusters raises") {
  const Labeling empty_est = labels({-1, -1, -1});
  const Labeling gt = labels({0, 0, 0});
  CHECK_THROWS_AS(iou(empty_est, gt), NoClusters);
}

TEST_SUITE_END();
