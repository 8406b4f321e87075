#pragma once

#include <filesystem>
#include <span>

#include "multireg/geometry.hpp"

namespace multireg {

struct EuclideanClusteringResult {
  Labeling labeling;
  double radius = 0.0;
  int cluster_count = 0;
  /// Set when no radius reaches within +/-50% of the target; the labeling is
  /// then the closest one found.
  bool target_unreachable = false;
};

/// Single-linkage clustering at a connectivity radius found by bisection so
/// that the cluster count lands within +/-10% of target_count (or the
/// interval collapses). Labels are canonical in first-occurrence order, so
/// the result is permutation-invariant up to renaming.
EuclideanClusteringResult euclidean_clusters(std::span<const Point3> points, int target_count);

/// Reads a "index,label" CSV (header optional) covering 0..n-1 exactly once.
/// -1 labels pass through as outliers. Throws ParseError / CoverageError.
Labeling load_labels(const std::filesystem::path& path);

}  // namespace multireg
