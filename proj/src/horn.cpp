#include "multireg/horn.hpp"

#include <Eigen/Dense>
#include <vector>

#include "multireg/errors.hpp"

namespace multireg {

RigidTransform fit_pose(const WeightedCorrespondences& wc) {
  const auto n = wc.items.size();
  if (wc.weights.size() != n) throw DegenerateInput("fit_pose: weights/items length mismatch");

  double total = 0.0;
  std::size_t positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = wc.weights[i];
    if (w < 0.0) throw DegenerateInput("fit_pose: negative weight");
    if (w > 0.0) {
      total += w;
      ++positive;
    }
  }
  if (positive < 3 || total <= 0.0)
    throw DegenerateInput("fit_pose: fewer than 3 positive-weight pairs");

  Point3 centroid_a = Point3::Zero();
  Point3 centroid_b = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = wc.weights[i];
    if (w == 0.0) continue;
    centroid_a += w * wc.items[i].a;
    centroid_b += w * wc.items[i].b;
  }
  centroid_a /= total;
  centroid_b /= total;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();    // sum w (a - abar)(b - bbar)^T
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();  // sum w (a - abar)(a - abar)^T
  for (std::size_t i = 0; i < n; ++i) {
    const double w = wc.weights[i];
    if (w == 0.0) continue;
    const Point3 da = wc.items[i].a - centroid_a;
    const Point3 db = wc.items[i].b - centroid_b;
    cross += w * (da * db.transpose());
    scatter += w * (da * da.transpose());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (ev[2] <= 0.0 || ev[1] < 1e-12 * ev[2])
    throw DegenerateInput("fit_pose: source points are collinear");

  // Maximize trace(R * cross): R = V diag(1, 1, det(V U^T)) U^T.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Eigen::Matrix3d rotation = v * d * u.transpose();

  return {rotation, centroid_b - rotation * centroid_a};
}

RigidTransform fit_pose(std::span<const Correspondence> items) {
  const std::vector<double> unit(items.size(), 1.0);
  return fit_pose(WeightedCorrespondences{items, unit});
}

}  // namespace multireg
