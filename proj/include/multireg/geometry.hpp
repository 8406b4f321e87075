#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <vector>

namespace multireg {

using Point3 = Eigen::Vector3d;

/// Rigid motion p -> R p + t. The rotation is checked on construction:
/// orthonormality drift within 1e-9 is accepted as-is, drift below 1e-6 is
/// projected back onto SO(3) (long compose chains accumulate), anything worse
/// throws std::invalid_argument.
class RigidTransform {
 public:
  RigidTransform();
  RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation);

  static RigidTransform identity() { return {}; }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Point3& translation() const { return translation_; }

 private:
  Eigen::Matrix3d rotation_;
  Point3 translation_;
};

/// A putative match between the two clouds.
struct Correspondence {
  Point3 a;
  Point3 b;
};

using PoseMap = std::map<int, RigidTransform>;

/// The n paired points, with optional ground-truth segmentation and motions.
struct CorrespondenceSet {
  std::vector<Correspondence> items;
  std::optional<std::vector<int>> gt_labels;
  std::optional<PoseMap> gt_poses;

  std::size_t size() const { return items.size(); }
  std::vector<Point3> source_points() const;
};

/// Per-correspondence cluster ids. The outlier/background sentinel is -1
/// everywhere, files included; non-outlier ids are contiguous 0..K-1 once
/// compacted.
struct Labeling {
  static constexpr int kOutlier = -1;

  std::vector<int> labels;

  Labeling() = default;
  explicit Labeling(std::vector<int> l) : labels(std::move(l)) {}

  std::size_t size() const { return labels.size(); }
  int cluster_count() const;

  /// Member index lists per cluster id; requires compact ids.
  std::vector<std::vector<int>> members() const;

  /// Renumbers non-outlier ids to 0..K-1 in first-occurrence order.
  void compact();
};

Point3 apply(const RigidTransform& t, const Point3& p);

/// ||b - (R a + t)||, the misfit of a correspondence under a pose.
double residual(const RigidTransform& t, const Correspondence& c);

/// Geodesic angle between rotations, arccos((trace(r1^T r2) - 1) / 2),
/// clamped into [0, pi].
double angular_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2);

/// compose(t1, t2) applies t2 first: R = R1 R2, t = R1 t2 + t1.
RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2);
RigidTransform inverse(const RigidTransform& t);

/// Closest rotation in Frobenius norm (SVD projection, det forced to +1).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

}  // namespace multireg
