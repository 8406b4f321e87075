#include "multireg/serialization.hpp"

#include <filesystem>

#include "multireg/errors.hpp"

namespace multireg {

using nlohmann::json;

namespace {

json vec3_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 vec3_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(field + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
T get_field(const json& j, const std::string& field, const T& fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field + ": wrong type");
  }
}

}  // namespace

json pose_to_json(const RigidTransform& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation()(r, c));
  return {{"rotation", rot}, {"translation", vec3_to_json(pose.translation())}};
}

RigidTransform pose_from_json(const json& j) {
  if (!j.contains("rotation") || !j.contains("translation"))
    throw ConfigError("pose: missing rotation/translation");
  const auto& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9)
    throw ConfigError("pose.rotation: expected 9 row-major numbers");
  Eigen::Matrix3d r;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      r(row, col) = rot[static_cast<std::size_t>(row * 3 + col)].get<double>();
  const Point3 t = vec3_from_json(j.at("translation"), "pose.translation");
  try {
    return {r, t};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("pose.rotation: ") + e.what());
  }
}

json estimate_to_json(const MultiModelEstimate& estimate) {
  json hyps = json::array();
  for (const auto& h : estimate.hypotheses) {
    json e = pose_to_json(h.pose);
    e["sigma"] = h.sigma;
    e["weight"] = h.weight;
    e["centroid"] = vec3_to_json(h.centroid);
    hyps.push_back(std::move(e));
  }
  return {{"hypotheses", hyps},
          {"labels", estimate.labeling.labels},
          {"iterations_run", estimate.iterations_run}};
}

MultiModelEstimate estimate_from_json(const json& j) {
  MultiModelEstimate out;
  if (!j.contains("hypotheses") || !j.contains("labels"))
    throw ConfigError("estimate: missing hypotheses/labels");
  for (const auto& e : j.at("hypotheses")) {
    Hypothesis h;
    h.pose = pose_from_json(e);
    h.sigma = get_field<double>(e, "sigma", 0.0);
    h.weight = get_field<double>(e, "weight", 0.0);
    if (e.contains("centroid")) h.centroid = vec3_from_json(e.at("centroid"), "centroid");
    out.hypotheses.push_back(h);
  }
  out.labeling.labels = j.at("labels").get<std::vector<int>>();
  out.iterations_run = get_field<int>(j, "iterations_run", 0);
  const int k = static_cast<int>(out.hypotheses.size());
  for (int l : out.labeling.labels)
    if (l >= k) throw ConfigError("estimate.labels: label " + std::to_string(l) +
                                  " has no hypothesis");
  return out;
}

json report_to_json(const MetricsReport& report) {
  json pairs = json::array();
  for (const auto& p : report.matched_pairs)
    pairs.push_back({{"est", p.est}, {"gt", p.gt}, {"weight", p.weight}});
  return {{"iou", report.iou},
          {"per_point_error", report.per_point_error},
          {"rotation_error", report.rotation_error},
          {"translation_error", report.translation_error},
          {"matched_pairs", pairs},
          {"outlier_precision", report.outlier_precision},
          {"outlier_recall", report.outlier_recall},
          {"est_clusters", report.est_clusters},
          {"gt_clusters", report.gt_clusters}};
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec spec;
  if (!j.contains("objects") || !j.at("objects").is_array() || j.at("objects").empty())
    throw ConfigError("objects: required non-empty array");
  for (std::size_t i = 0; i < j.at("objects").size(); ++i) {
    const auto& o = j.at("objects")[i];
    const std::string where = "objects[" + std::to_string(i) + "]";
    ObjectSpec obj;
    if (!o.contains("source")) throw ConfigError(where + ".source: required");
    obj.source = o.at("source").get<std::string>();
    obj.count = get_field<int>(o, "count", obj.count);
    obj.diameter = get_field<double>(o, "diameter", obj.diameter);
    if (o.contains("center")) obj.center = vec3_from_json(o.at("center"), where + ".center");
    spec.objects.push_back(std::move(obj));
  }
  spec.noise_sigma = get_field<double>(j, "noise_sigma", spec.noise_sigma);
  spec.outlier_fraction = get_field<double>(j, "outlier_fraction", spec.outlier_fraction);
  spec.min_separation = get_field<double>(j, "min_separation", spec.min_separation);
  spec.seed = get_field<std::uint64_t>(j, "seed", spec.seed);
  if (j.contains("shared_motion_groups"))
    spec.shared_motion_groups =
        j.at("shared_motion_groups").get<std::vector<std::vector<int>>>();
  const auto read_box = [&](const char* field, Box3& box) {
    if (!j.contains(field)) return;
    const auto& b = j.at(field);
    if (!b.contains("min") || !b.contains("max"))
      throw ConfigError(std::string(field) + ": expected {min: [3], max: [3]}");
    box.min = vec3_from_json(b.at("min"), std::string(field) + ".min");
    box.max = vec3_from_json(b.at("max"), std::string(field) + ".max");
  };
  read_box("translation_box", spec.translation_box);
  read_box("placement_box", spec.placement_box);
  return spec;
}

json ground_truth_to_json(const CorrespondenceSet& corrs, double sigma, std::uint64_t seed) {
  json poses = json::object();
  if (corrs.gt_poses) {
    for (const auto& [label, pose] : *corrs.gt_poses)
      poses[std::to_string(label)] = pose_to_json(pose);
  }
  return {{"sigma", sigma},
          {"seed", seed},
          {"n", corrs.size()},
          {"poses", poses}};
}

void ground_truth_from_json(const json& j, CorrespondenceSet& corrs) {
  if (!j.contains("poses")) throw ConfigError("ground truth: missing poses");
  PoseMap poses;
  for (const auto& [key, value] : j.at("poses").items()) {
    long label = 0;
    try {
      label = std::stol(key);
    } catch (const std::exception&) {
      throw ConfigError("ground truth: non-integer cluster key '" + key + "'");
    }
    poses.emplace(static_cast<int>(label), pose_from_json(value));
  }
  if (corrs.gt_labels) {
    for (int l : *corrs.gt_labels)
      if (l >= 0 && !poses.contains(l))
        throw ConfigError("ground truth: no pose for cluster " + std::to_string(l));
  }
  corrs.gt_poses = std::move(poses);
}

std::string ground_truth_path_for(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension();
  return p.string() + ".gt.json";
}

}  // namespace multireg
