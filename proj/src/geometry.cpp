#include "multireg/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace multireg {

namespace {

double orthonormality_drift(const Eigen::Matrix3d& r) {
  const Eigen::Matrix3d gram = r.transpose() * r - Eigen::Matrix3d::Identity();
  return std::max(gram.cwiseAbs().maxCoeff(), std::abs(r.determinant() - 1.0));
}

}  // namespace

RigidTransform::RigidTransform()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Point3::Zero()) {}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation)
    : rotation_(rotation), translation_(translation) {
  const double drift = orthonormality_drift(rotation_);
  if (drift <= 1e-9) return;
  if (drift < 1e-6) {
    rotation_ = nearest_rotation(rotation_);
    return;
  }
  throw std::invalid_argument("RigidTransform: matrix is not a rotation (drift " +
                              std::to_string(drift) + ")");
}

std::vector<Point3> CorrespondenceSet::source_points() const {
  std::vector<Point3> out;
  out.reserve(items.size());
  for (const auto& c : items) out.push_back(c.a);
  return out;
}

int Labeling::cluster_count() const {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

std::vector<std::vector<int>> Labeling::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(cluster_count()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) out[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  return out;
}

void Labeling::compact() {
  std::unordered_map<int, int> remap;
  int next = 0;
  for (int& l : labels) {
    if (l < 0) {
      l = kOutlier;
      continue;
    }
    auto [it, inserted] = remap.emplace(l, next);
    if (inserted) ++next;
    l = it->second;
  }
}

Point3 apply(const RigidTransform& t, const Point3& p) {
  return t.rotation() * p + t.translation();
}

double residual(const RigidTransform& t, const Correspondence& c) {
  return (c.b - t.rotation() * c.a - t.translation()).norm();
}

double angular_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
  const double cos_angle = ((r1.transpose() * r2).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(cos_angle, -1.0, 1.0));
}

RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2) {
  return {t1.rotation() * t2.rotation(), t1.rotation() * t2.translation() + t1.translation()};
}

RigidTransform inverse(const RigidTransform& t) {
  const Eigen::Matrix3d rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace multireg
