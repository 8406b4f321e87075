#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "multireg/geometry.hpp"

namespace multireg {

struct Box3 {
  Point3 min{-5.0, -5.0, -5.0};
  Point3 max{5.0, 5.0, 5.0};
};

/// One object of a synthetic scene. source is a procedural shape id ("box",
/// "sphere", "cylinder", "l_bracket") or a path to a PLY/CSV cloud.
struct ObjectSpec {
  std::string source = "box";
  int count = 300;
  /// Procedural shapes are generated to fit a ball of this diameter; loaded
  /// clouds are recentered and rescaled to it unless it is <= 0.
  double diameter = 3.0;
  /// Placement of the object in the first cloud; sampled inside
  /// placement_box (respecting min_separation) when absent.
  std::optional<Point3> center;
};

struct SceneSpec {
  std::vector<ObjectSpec> objects;
  double noise_sigma = 0.0;
  /// Objects listed in one group receive the identical pose.
  std::vector<std::vector<int>> shared_motion_groups;
  double outlier_fraction = 0.0;
  Box3 translation_box;  // motion translations are uniform in this box
  Box3 placement_box;    // sampled object centers live here
  double min_separation = 0.5;
  std::uint64_t seed = 0;
};

/// Builds the correspondence set: per object, a placed source cloud and
/// b = R a + t + noise, with gt labels (object index) and gt poses. Outlier
/// pairs (floor(outlier_fraction * n) of them, label -1) are appended with
/// both sides uniform in the inlier bounding boxes. Bit-deterministic in the
/// seed.
CorrespondenceSet generate_scene(const SceneSpec& spec);

/// Points of one procedural shape, centered at the origin, inside a ball of
/// the given diameter. Exposed for tests.
std::vector<Point3> procedural_shape(const std::string& id, int count, double diameter,
                                     std::uint64_t seed);

/// ASCII PLY (x,y,z vertex properties) or CSV "x,y,z" (optional header).
std::vector<Point3> load_point_cloud(const std::filesystem::path& path);

/// CSV "ax,ay,az,bx,by,bz[,gt_label]". Doubles are written with 17
/// significant digits so a round trip is exact.
void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& corrs);
CorrespondenceSet load_correspondences(const std::filesystem::path& path);

}  // namespace multireg
