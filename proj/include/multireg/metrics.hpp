#pragma once

#include <map>
#include <span>
#include <vector>

#include "multireg/em.hpp"
#include "multireg/geometry.hpp"

namespace multireg {

struct MatchedPair {
  int est = 0;
  int gt = 0;
  double weight = 0.0;  // |H_est ∩ G_gt| / |H_est|
};

struct PoseErrorResult {
  double rotation_error = 0.0;     // radians
  double translation_error = 0.0;  // meters
  std::vector<MatchedPair> pairs;  // all intersecting (est, gt) pairs
};

struct MetricsReport {
  double iou = 0.0;
  double per_point_error = 0.0;
  double rotation_error = 0.0;
  double translation_error = 0.0;
  std::vector<MatchedPair> matched_pairs;
  // Informative only; outlier points are excluded from the object metrics.
  double outlier_precision = 1.0;
  double outlier_recall = 1.0;
  int est_clusters = 0;
  int gt_clusters = 0;
};

/// Maps every estimated cluster to the ground-truth cluster with the largest
/// intersection, ties to the smallest gt id. Outlier points belong to no
/// cluster on either side.
std::map<int, int> match_clusters(const Labeling& est, const Labeling& gt);

/// Symmetric Chamfer distance:
/// (mean_p min_q ||p-q|| + mean_q min_p ||q-p||) / 2. Throws EmptySet.
double chamfer(std::span<const Point3> p, std::span<const Point3> q);

/// Segments the source cloud by gt and est labels, moves each segment by its
/// pose, and averages the Chamfer distance between each estimated object and
/// its largest-intersection ground-truth object.
double per_point_error(std::span<const Point3> source, const Labeling& gt,
                       const PoseMap& gt_poses, const Labeling& est, const PoseMap& est_poses);

/// Per estimated cluster, the intersection-weighted average of angular and
/// translation distances to every overlapping ground-truth pose; reported as
/// the mean over estimated clusters.
PoseErrorResult pose_errors(const Labeling& gt, const PoseMap& gt_poses, const Labeling& est,
                            const PoseMap& est_poses);

/// Average intersection-over-union between each estimated cluster and its
/// matched ground-truth cluster.
double iou(const Labeling& est, const Labeling& gt);

/// Full report against the ground truth carried by the correspondence set.
MetricsReport compute_report(const CorrespondenceSet& corrs, const MultiModelEstimate& estimate);

}  // namespace multireg
