#include "multireg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "multireg/errors.hpp"
#include "multireg/spatial_grid.hpp"

namespace multireg {

namespace {

std::vector<std::vector<int>> cluster_members(const Labeling& l) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(l.cluster_count()));
  for (std::size_t i = 0; i < l.labels.size(); ++i)
    if (l.labels[i] >= 0) out[static_cast<std::size_t>(l.labels[i])].push_back(static_cast<int>(i));
  return out;
}

/// intersections[j][k] = |H_j ∩ G_k| over non-outlier labels.
std::vector<std::map<int, int>> intersection_table(const Labeling& est, const Labeling& gt) {
  std::vector<std::map<int, int>> table(static_cast<std::size_t>(est.cluster_count()));
  for (std::size_t i = 0; i < est.labels.size(); ++i) {
    const int e = est.labels[i];
    const int g = gt.labels[i];
    if (e >= 0 && g >= 0) ++table[static_cast<std::size_t>(e)][g];
  }
  return table;
}

const RigidTransform& pose_for(const PoseMap& poses, int label, const char* side) {
  const auto it = poses.find(label);
  if (it == poses.end())
    throw ConfigError(std::string(side) + " pose missing for cluster " + std::to_string(label));
  return it->second;
}

double grid_cell_for(std::span<const Point3> pts) {
  Point3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  const double cell = diag / std::cbrt(static_cast<double>(pts.size()));
  return cell > 0.0 ? cell : 1.0;
}

double mean_nearest(std::span<const Point3> from, std::span<const Point3> to) {
  const SpatialGrid grid(to, grid_cell_for(to));
  double sum = 0.0;
  for (const auto& p : from) sum += grid.nearest_distance(p);
  return sum / static_cast<double>(from.size());
}

}  // namespace

std::map<int, int> match_clusters(const Labeling& est, const Labeling& gt) {
  if (est.labels.size() != gt.labels.size())
    throw ConfigError("match_clusters: labeling length mismatch");
  const auto table = intersection_table(est, gt);
  std::map<int, int> out;
  const int gt_count = gt.cluster_count();
  for (std::size_t j = 0; j < table.size(); ++j) {
    int best_gt = gt_count > 0 ? 0 : Labeling::kOutlier;
    int best_common = -1;
    for (const auto& [g, common] : table[j]) {
      if (common > best_common) {  // map iterates ascending: ties keep smallest gt id
        best_common = common;
        best_gt = g;
      }
    }
    out[static_cast<int>(j)] = best_gt;
  }
  return out;
}

double chamfer(std::span<const Point3> p, std::span<const Point3> q) {
  if (p.empty() || q.empty()) throw EmptySet("chamfer: empty point set");
  return 0.5 * (mean_nearest(p, q) + mean_nearest(q, p));
}

double per_point_error(std::span<const Point3> source, const Labeling& gt,
                       const PoseMap& gt_poses, const Labeling& est, const PoseMap& est_poses) {
  if (source.size() != gt.labels.size() || source.size() != est.labels.size())
    throw ConfigError("per_point_error: length mismatch");
  const auto est_members = cluster_members(est);
  const auto gt_members = cluster_members(gt);
  if (est_members.empty() || gt_members.empty())
    throw NoClusters("per_point_error: no clusters to compare");

  const auto transformed = [&](const std::vector<int>& members, const RigidTransform& pose) {
    std::vector<Point3> out;
    out.reserve(members.size());
    for (int i : members) out.push_back(apply(pose, source[static_cast<std::size_t>(i)]));
    return out;
  };

  std::vector<std::vector<Point3>> gt_clouds(gt_members.size());
  for (std::size_t k = 0; k < gt_members.size(); ++k)
    gt_clouds[k] = transformed(gt_members[k], pose_for(gt_poses, static_cast<int>(k), "gt"));

  const auto match = match_clusters(est, gt);
  double sum = 0.0;
  int counted = 0;
  for (std::size_t j = 0; j < est_members.size(); ++j) {
    if (est_members[j].empty()) continue;
    const auto est_cloud =
        transformed(est_members[j], pose_for(est_poses, static_cast<int>(j), "est"));
    const int g = match.at(static_cast<int>(j));
    if (g < 0 || gt_clouds[static_cast<std::size_t>(g)].empty()) continue;
    sum += chamfer(est_cloud, gt_clouds[static_cast<std::size_t>(g)]);
    ++counted;
  }
  if (counted == 0) throw NoClusters("per_point_error: no comparable clusters");
  return sum / static_cast<double>(counted);
}

PoseErrorResult pose_errors(const Labeling& gt, const PoseMap& gt_poses, const Labeling& est,
                            const PoseMap& est_poses) {
  if (est.labels.size() != gt.labels.size()) throw ConfigError("pose_errors: length mismatch");
  const auto table = intersection_table(est, gt);
  const auto est_members = cluster_members(est);
  if (est_members.empty() || gt.cluster_count() == 0)
    throw NoClusters("pose_errors: no clusters to compare");

  PoseErrorResult out;
  double rot_sum = 0.0, tr_sum = 0.0;
  int counted = 0;
  for (std::size_t j = 0; j < est_members.size(); ++j) {
    const auto size_j = static_cast<double>(est_members[j].size());
    if (size_j == 0.0) continue;
    const RigidTransform& est_pose = pose_for(est_poses, static_cast<int>(j), "est");
    double rot_j = 0.0, tr_j = 0.0;
    for (const auto& [g, common] : table[j]) {
      const RigidTransform& gt_pose = pose_for(gt_poses, g, "gt");
      const double w = static_cast<double>(common) / size_j;
      rot_j += w * angular_distance(est_pose.rotation(), gt_pose.rotation());
      tr_j += w * (est_pose.translation() - gt_pose.translation()).norm();
      out.pairs.push_back({static_cast<int>(j), g, w});
    }
    rot_sum += rot_j;
    tr_sum += tr_j;
    ++counted;
  }
  if (counted == 0) throw NoClusters("pose_errors: no comparable clusters");
  out.rotation_error = rot_sum / static_cast<double>(counted);
  out.translation_error = tr_sum / static_cast<double>(counted);
  return out;
}

double iou(const Labeling& est, const Labeling& gt) {
  if (est.labels.size() != gt.labels.size()) throw ConfigError("iou: length mismatch");
  const auto table = intersection_table(est, gt);
  const auto est_members = cluster_members(est);
  const auto gt_members = cluster_members(gt);
  if (est_members.empty() || gt_members.empty()) throw NoClusters("iou: no clusters to compare");

  const auto match = match_clusters(est, gt);
  double sum = 0.0;
  int counted = 0;
  for (std::size_t j = 0; j < est_members.size(); ++j) {
    if (est_members[j].empty()) continue;
    const int g = match.at(static_cast<int>(j));
    double value = 0.0;
    if (g >= 0) {
      const auto it = table[j].find(g);
      const int common = it == table[j].end() ? 0 : it->second;
      const double union_size = static_cast<double>(est_members[j].size()) +
                                static_cast<double>(gt_members[static_cast<std::size_t>(g)].size()) -
                                static_cast<double>(common);
      value = union_size > 0.0 ? static_cast<double>(common) / union_size : 0.0;
    }
    sum += value;
    ++counted;
  }
  if (counted == 0) throw NoClusters("iou: no comparable clusters");
  return sum / static_cast<double>(counted);
}

MetricsReport compute_report(const CorrespondenceSet& corrs, const MultiModelEstimate& estimate) {
  if (!corrs.gt_labels || !corrs.gt_poses)
    throw ConfigError("compute_report: correspondence set carries no ground truth");
  if (corrs.gt_labels->size() != corrs.size() ||
      estimate.labeling.labels.size() != corrs.size())
    throw ConfigError("compute_report: length mismatch");

  Labeling gt(std::vector<int>(*corrs.gt_labels));
  gt.compact();
  // Compaction preserves first-occurrence order; rebuild the pose map under
  // the compacted ids.
  PoseMap gt_poses;
  {
    std::unordered_map<int, int> remap;
    for (std::size_t i = 0; i < corrs.gt_labels->size(); ++i) {
      const int orig = (*corrs.gt_labels)[i];
      if (orig >= 0) remap.emplace(orig, gt.labels[i]);
    }
    for (const auto& [orig, compacted] : remap)
      gt_poses.emplace(compacted, pose_for(*corrs.gt_poses, orig, "gt"));
  }

  PoseMap est_poses;
  for (std::size_t j = 0; j < estimate.hypotheses.size(); ++j)
    est_poses.emplace(static_cast<int>(j), estimate.hypotheses[j].pose);

  MetricsReport report;
  report.est_clusters = estimate.labeling.cluster_count();
  report.gt_clusters = gt.cluster_count();
  report.iou = iou(estimate.labeling, gt);
  const auto source = corrs.source_points();
  report.per_point_error = per_point_error(source, gt, gt_poses, estimate.labeling, est_poses);
  auto pe = pose_errors(gt, gt_poses, estimate.labeling, est_poses);
  report.rotation_error = pe.rotation_error;
  report.translation_error = pe.translation_error;
  report.matched_pairs = std::move(pe.pairs);

  std::size_t est_out = 0, gt_out = 0, both = 0;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const bool e = estimate.labeling.labels[i] < 0;
    const bool g = gt.labels[i] < 0;
    est_out += e;
    gt_out += g;
    both += e && g;
  }
  report.outlier_precision =
      est_out == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(est_out);
  report.outlier_recall =
      gt_out == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(gt_out);
  return report;
}

}  // namespace multireg
