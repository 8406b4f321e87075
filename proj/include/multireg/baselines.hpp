#pragma once

#include <cstdint>
#include <span>

#include "multireg/em.hpp"
#include "multireg/geometry.hpp"

namespace multireg {

struct SransacParams {
  double inlier_threshold = 0.01;  // meters, strict < comparison
  int max_iterations = 1000;
  int min_inliers_to_continue = 4;
  std::uint64_t seed = 0;
};

struct TlinkageParams {
  double tau_t = 0.2;       // preference scale (meters)
  double merge_stop = 1.0;  // stop when min pairwise Tanimoto distance >= this
};

/// One Horn fit per init cluster of size >= 3, unit weights; smaller clusters
/// are labeled outliers. Reflects the quality of the initial clustering.
MultiModelEstimate solve_naive(const CorrespondenceSet& corrs, const Labeling& init);

/// Sequential RANSAC: recover one motion at a time (minimal samples of 3,
/// consensus by residual < inlier_threshold, best over max_iterations, refit
/// on consensus), remove its inliers, repeat until the best consensus falls
/// below min_inliers_to_continue. Remaining points are outliers.
MultiModelEstimate solve_sransac(const CorrespondenceSet& corrs, const SransacParams& params);

/// Preference of a point for a pose at residual d:
/// exp(-d / tau_t) when d <= 5 tau_t, else 0.
double preference(double d, double tau_t);

/// 1 - <u,v> / (||u||^2 + ||v||^2 - <u,v>); 1 by convention when both are
/// all-zero.
double tanimoto_distance(std::span<const double> u, std::span<const double> v);

/// Agglomerates init clusters: cluster preferences are element-wise minima of
/// member point preferences over the current cluster poses; the closest pair
/// under Tanimoto distance merges (ties to the smallest pair indices) until
/// every pairwise distance reaches merge_stop. Surviving clusters of size >= 3
/// with a valid pose become hypotheses.
MultiModelEstimate solve_tlinkage(const CorrespondenceSet& corrs, const Labeling& init,
                                  const TlinkageParams& params);

}  // namespace multireg
