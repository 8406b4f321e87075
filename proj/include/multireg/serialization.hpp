#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "multireg/em.hpp"
#include "multireg/geometry.hpp"
#include "multireg/metrics.hpp"
#include "multireg/scenegen.hpp"

namespace multireg {

/// Poses serialize as {"rotation": [9 row-major floats], "translation": [3]}.
nlohmann::json pose_to_json(const RigidTransform& pose);
RigidTransform pose_from_json(const nlohmann::json& j);

nlohmann::json estimate_to_json(const MultiModelEstimate& estimate);
MultiModelEstimate estimate_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const MetricsReport& report);

/// Throws ConfigError naming the offending field.
SceneSpec scene_spec_from_json(const nlohmann::json& j);

/// Ground-truth sidecar: noise sigma, seed and per-cluster poses.
nlohmann::json ground_truth_to_json(const CorrespondenceSet& corrs, double sigma,
                                    std::uint64_t seed);
/// Fills corrs.gt_poses (and validates against gt labels when present).
void ground_truth_from_json(const nlohmann::json& j, CorrespondenceSet& corrs);

/// Default sidecar path for a correspondences CSV: "<stem>.gt.json" next to it.
std::string ground_truth_path_for(const std::string& csv_path);

}  // namespace multireg
