#pragma once

#include <span>

#include "multireg/geometry.hpp"

namespace multireg {

/// View over correspondences with a nonnegative weight per item.
struct WeightedCorrespondences {
  std::span<const Correspondence> items;
  std::span<const double> weights;  // same length as items
};

/// Weighted closed-form absolute orientation: returns the rigid transform
/// minimizing sum_i w_i ||b_i - R a_i - t||^2 with det(R) = +1. Internally
/// the SVD of the weighted cross-covariance with a sign-corrected last
/// singular vector, so reflections are never returned even for planar or
/// mirrored inputs.
///
/// Throws DegenerateInput when fewer than 3 pairs carry positive weight or
/// the weighted source points are collinear (middle scatter eigenvalue below
/// 1e-12 times the largest; a collinear source leaves the rotation about the
/// line unidentifiable). Coplanar sources are fine.
RigidTransform fit_pose(const WeightedCorrespondences& wc);

/// Unit-weight convenience overload.
RigidTransform fit_pose(std::span<const Correspondence> items);

}  // namespace multireg
