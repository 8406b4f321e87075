#include "multireg/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include "multireg/detail/format.hpp"
#include "multireg/errors.hpp"
#include "multireg/rng.hpp"

namespace multireg {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_long;
using detail::split;
using detail::trim;

std::vector<Point3> shape_box(int count, double diameter, Rng& rng) {
  const double half = diameter / std::sqrt(3.0) / 2.0;
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::size_t face = rng.uniform_index(6);
    const double u = rng.uniform(-half, half);
    const double v = rng.uniform(-half, half);
    const double s = face % 2 == 0 ? half : -half;
    switch (face / 2) {
      case 0: pts.emplace_back(s, u, v); break;
      case 1: pts.emplace_back(u, s, v); break;
      default: pts.emplace_back(u, v, s); break;
    }
  }
  return pts;
}

std::vector<Point3> shape_sphere(int count, double diameter, Rng& rng) {
  const double radius = diameter / 2.0;
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Point3 dir;
    double n = 0.0;
    do {
      dir = {rng.normal(), rng.normal(), rng.normal()};
      n = dir.norm();
    } while (n < 1e-9);
    pts.push_back(radius / n * dir);
  }
  return pts;
}

std::vector<Point3> shape_cylinder(int count, double diameter, Rng& rng) {
  // h = 0.8 d and r = 0.3 d put every point exactly on the d/2 ball only at
  // the rim; everything fits inside.
  const double h = 0.8 * diameter;
  const double r = 0.3 * diameter;
  const double lateral = 2.0 * M_PI * r * h;
  const double caps = 2.0 * M_PI * r * r;
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    if (rng.uniform() * (lateral + caps) < lateral) {
      const double theta = rng.uniform(0.0, 2.0 * M_PI);
      pts.emplace_back(r * std::cos(theta), r * std::sin(theta), rng.uniform(-h / 2.0, h / 2.0));
    } else {
      const double z = rng.uniform() < 0.5 ? -h / 2.0 : h / 2.0;
      const double rho = r * std::sqrt(rng.uniform());
      const double theta = rng.uniform(0.0, 2.0 * M_PI);
      pts.emplace_back(rho * std::cos(theta), rho * std::sin(theta), z);
    }
  }
  return pts;
}

std::vector<Point3> shape_l_bracket(int count, double diameter, Rng& rng) {
  // Union of two planks forming an L; corners stay inside the d/2 ball.
  const double d = diameter;
  const auto in_a = [d](const Point3& p) {
    return p.x() >= -0.34 * d && p.x() <= -0.14 * d && p.y() >= -0.34 * d && p.y() <= 0.34 * d;
  };
  const auto in_b = [d](const Point3& p) {
    return p.x() >= -0.34 * d && p.x() <= 0.34 * d && p.y() >= -0.34 * d && p.y() <= -0.14 * d;
  };
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  while (pts.size() < static_cast<std::size_t>(count)) {
    const Point3 p{rng.uniform(-0.34 * d, 0.34 * d), rng.uniform(-0.34 * d, 0.34 * d),
                   rng.uniform(-0.10 * d, 0.10 * d)};
    if (in_a(p) || in_b(p)) pts.push_back(p);
  }
  return pts;
}

bool is_procedural(const std::string& id) {
  return id == "box" || id == "sphere" || id == "cylinder" || id == "l_bracket";
}

struct SmallUnionFind {
  std::vector<int> parent;
  explicit SmallUnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

void validate(const SceneSpec& spec) {
  if (spec.objects.empty()) throw ConfigError("objects: at least one object required");
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& obj = spec.objects[i];
    if (obj.count < 4 && is_procedural(obj.source))
      throw ConfigError("objects[" + std::to_string(i) + "].count must be >= 4");
    if (obj.source.empty()) throw ConfigError("objects[" + std::to_string(i) + "].source empty");
  }
  if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0))
    throw ConfigError("outlier_fraction must be in [0, 1)");
  if (!(spec.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  for (const auto& g : spec.shared_motion_groups) {
    for (int idx : g) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= spec.objects.size())
        throw ConfigError("shared_motion_groups: object index " + std::to_string(idx) +
                          " out of range");
    }
  }
  for (const auto* box : {&spec.translation_box, &spec.placement_box}) {
    if ((box->max - box->min).minCoeff() < 0.0)
      throw ConfigError("box: min must not exceed max componentwise");
  }
}

}  // namespace

std::vector<Point3> procedural_shape(const std::string& id, int count, double diameter,
                                     std::uint64_t seed) {
  if (count < 1) throw ConfigError("procedural_shape: count must be >= 1");
  if (!(diameter > 0.0)) throw ConfigError("procedural_shape: diameter must be > 0");
  Rng rng(seed);
  if (id == "box") return shape_box(count, diameter, rng);
  if (id == "sphere") return shape_sphere(count, diameter, rng);
  if (id == "cylinder") return shape_cylinder(count, diameter, rng);
  if (id == "l_bracket") return shape_l_bracket(count, diameter, rng);
  throw ConfigError("procedural_shape: unknown shape id '" + id + "'");
}

CorrespondenceSet generate_scene(const SceneSpec& spec) {
  validate(spec);
  const auto m = spec.objects.size();

  // Object placement: explicit centers win, the rest are sampled with
  // pairwise separation of at least the two radii plus min_separation.
  std::vector<Point3> centers(m, Point3::Zero());
  std::vector<bool> placed(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (spec.objects[i].center) {
      centers[i] = *spec.objects[i].center;
      placed[i] = true;
    }
  }
  Rng place_rng(Rng::mix(spec.seed, 1));
  for (std::size_t i = 0; i < m; ++i) {
    if (placed[i]) continue;
    const double ri = std::max(spec.objects[i].diameter, 0.0) / 2.0;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      Point3 c;
      for (int axis = 0; axis < 3; ++axis)
        c[axis] = place_rng.uniform(spec.placement_box.min[axis], spec.placement_box.max[axis]);
      ok = true;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i || !placed[j]) continue;
        const double rj = std::max(spec.objects[j].diameter, 0.0) / 2.0;
        if ((c - centers[j]).norm() < ri + rj + spec.min_separation) {
          ok = false;
          break;
        }
      }
      if (ok) centers[i] = c;
    }
    if (!ok)
      throw ConfigError("placement_box too crowded to place object " + std::to_string(i) +
                        " with min_separation " + std::to_string(spec.min_separation));
    placed[i] = true;
  }

  // Source clouds in the first frame.
  std::vector<std::vector<Point3>> clouds(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& obj = spec.objects[i];
    const std::uint64_t obj_seed = Rng::mix(spec.seed, 100 + static_cast<std::uint64_t>(i));
    std::vector<Point3> cloud;
    if (is_procedural(obj.source)) {
      cloud = procedural_shape(obj.source, obj.count, obj.diameter, obj_seed);
    } else {
      cloud = load_point_cloud(obj.source);
      if (obj.count > 0 && cloud.size() > static_cast<std::size_t>(obj.count)) {
        // Deterministic subsample without replacement, file order kept.
        Rng sub_rng(obj_seed);
        std::set<std::size_t> pick;
        while (pick.size() < static_cast<std::size_t>(obj.count))
          pick.insert(sub_rng.uniform_index(cloud.size()));
        std::vector<Point3> sub;
        sub.reserve(pick.size());
        for (std::size_t idx : pick) sub.push_back(cloud[idx]);
        cloud = std::move(sub);
      }
      if (cloud.size() < 4)
        throw ConfigError("objects[" + std::to_string(i) + "]: needs at least 4 points");
      Point3 centroid = Point3::Zero();
      for (const auto& p : cloud) centroid += p;
      centroid /= static_cast<double>(cloud.size());
      double max_r = 0.0;
      for (auto& p : cloud) {
        p -= centroid;
        max_r = std::max(max_r, p.norm());
      }
      if (obj.diameter > 0.0 && max_r > 0.0) {
        const double scale = obj.diameter / 2.0 / max_r;
        for (auto& p : cloud) p *= scale;
      }
    }
    for (auto& p : cloud) p += centers[i];
    clouds[i] = std::move(cloud);
  }

  // One pose per motion group, identical (bitwise) within a group.
  SmallUnionFind groups(static_cast<int>(m));
  for (const auto& g : spec.shared_motion_groups)
    for (std::size_t k = 1; k < g.size(); ++k) groups.unite(g[0], g[k]);
  Rng pose_rng(Rng::mix(spec.seed, 2));
  std::vector<RigidTransform> poses;
  poses.reserve(m);
  std::map<int, RigidTransform> rep_pose;
  for (std::size_t i = 0; i < m; ++i) {
    const int rep = groups.find(static_cast<int>(i));
    auto it = rep_pose.find(rep);
    if (it == rep_pose.end()) {
      const Eigen::Matrix3d r = pose_rng.random_rotation();
      Point3 t;
      for (int axis = 0; axis < 3; ++axis)
        t[axis] = pose_rng.uniform(spec.translation_box.min[axis], spec.translation_box.max[axis]);
      it = rep_pose.emplace(rep, RigidTransform(r, t)).first;
    }
    poses.push_back(it->second);
  }

  CorrespondenceSet out;
  out.gt_labels.emplace();
  out.gt_poses.emplace();
  for (std::size_t i = 0; i < m; ++i) {
    Rng noise_rng(Rng::mix(spec.seed, 200 + static_cast<std::uint64_t>(i)));
    for (const auto& a : clouds[i]) {
      Point3 b = apply(poses[i], a);
      if (spec.noise_sigma > 0.0) b += noise_rng.normal3(spec.noise_sigma);
      out.items.push_back({a, b});
      out.gt_labels->push_back(static_cast<int>(i));
    }
    out.gt_poses->emplace(static_cast<int>(i), poses[i]);
  }

  const auto n_inliers = out.items.size();
  const auto n_outliers =
      static_cast<std::size_t>(std::floor(spec.outlier_fraction * static_cast<double>(n_inliers)));
  if (n_outliers > 0) {
    Point3 a_lo = out.items[0].a, a_hi = out.items[0].a;
    Point3 b_lo = out.items[0].b, b_hi = out.items[0].b;
    for (const auto& c : out.items) {
      a_lo = a_lo.cwiseMin(c.a);
      a_hi = a_hi.cwiseMax(c.a);
      b_lo = b_lo.cwiseMin(c.b);
      b_hi = b_hi.cwiseMax(c.b);
    }
    Rng out_rng(Rng::mix(spec.seed, 3));
    for (std::size_t k = 0; k < n_outliers; ++k) {
      Point3 a, b;
      for (int axis = 0; axis < 3; ++axis) a[axis] = out_rng.uniform(a_lo[axis], a_hi[axis]);
      for (int axis = 0; axis < 3; ++axis) b[axis] = out_rng.uniform(b_lo[axis], b_hi[axis]);
      out.items.push_back({a, b});
      out.gt_labels->push_back(Labeling::kOutlier);
    }
  }
  return out;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

[[noreturn]] void fail_parse(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

std::vector<Point3> parse_ply(const std::filesystem::path& path,
                              const std::vector<std::string>& lines) {
  std::size_t ln = 1;  // lines[0] == "ply"
  long vertex_count = -1;
  int x_prop = -1, y_prop = -1, z_prop = -1;
  int prop_count = 0;
  bool in_vertex_element = false;
  bool ascii = false;
  for (ln = 1; ln < lines.size(); ++ln) {
    const auto fields = split(trim(lines[ln]), ' ');
    if (fields.empty() || fields[0].empty()) continue;
    if (fields[0] == "end_header") {
      ++ln;
      break;
    }
    if (fields[0] == "format") {
      if (fields.size() < 2 || fields[1] != "ascii")
        fail_parse(path, ln + 1, "only ascii ply is supported");
      ascii = true;
    } else if (fields[0] == "element") {
      if (fields.size() < 3) fail_parse(path, ln + 1, "malformed element line");
      if (fields[1] == "vertex") {
        if (!parse_long(fields[2], vertex_count) || vertex_count < 0)
          fail_parse(path, ln + 1, "bad vertex count");
        in_vertex_element = true;
      } else {
        if (vertex_count < 0)
          fail_parse(path, ln + 1, "vertex element must come first");
        in_vertex_element = false;
      }
    } else if (fields[0] == "property" && in_vertex_element) {
      if (fields.size() < 3) fail_parse(path, ln + 1, "malformed property line");
      const auto name = fields.back();
      if (name == "x") x_prop = prop_count;
      if (name == "y") y_prop = prop_count;
      if (name == "z") z_prop = prop_count;
      ++prop_count;
    }
  }
  if (!ascii) fail_parse(path, 1, "missing 'format ascii' header");
  if (vertex_count < 0) fail_parse(path, ln, "missing 'element vertex' header");
  if (x_prop < 0 || y_prop < 0 || z_prop < 0)
    fail_parse(path, ln, "vertex element lacks x, y, z properties");

  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(vertex_count));
  for (long v = 0; v < vertex_count; ++v, ++ln) {
    if (ln >= lines.size())
      fail_parse(path, ln + 1, "truncated vertex list (expected " +
                                   std::to_string(vertex_count) + " vertices)");
    const auto fields = split(trim(lines[ln]), ' ');
    if (static_cast<int>(fields.size()) < prop_count)
      fail_parse(path, ln + 1, "vertex line has too few fields");
    double x = 0, y = 0, z = 0;
    if (!parse_double(fields[static_cast<std::size_t>(x_prop)], x) ||
        !parse_double(fields[static_cast<std::size_t>(y_prop)], y) ||
        !parse_double(fields[static_cast<std::size_t>(z_prop)], z))
      fail_parse(path, ln + 1, "bad vertex coordinate");
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      fail_parse(path, ln + 1, "non-finite vertex coordinate");
    pts.emplace_back(x, y, z);
  }
  return pts;
}

std::vector<Point3> parse_xyz_csv(const std::filesystem::path& path,
                                  const std::vector<std::string>& lines) {
  std::vector<Point3> pts;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) fail_parse(path, ln + 1, "expected 'x,y,z'");
    double x = 0, y = 0, z = 0;
    if (!parse_double(trim(fields[0]), x) || !parse_double(trim(fields[1]), y) ||
        !parse_double(trim(fields[2]), z)) {
      if (ln == 0) continue;  // header row
      fail_parse(path, ln + 1, "bad coordinate");
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      fail_parse(path, ln + 1, "non-finite coordinate");
    pts.emplace_back(x, y, z);
  }
  if (pts.empty()) throw ParseError(path.string() + ": no points");
  return pts;
}

}  // namespace

std::vector<Point3> load_point_cloud(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": empty file");
  if (trim(lines[0]) == "ply") return parse_ply(path, lines);
  return parse_xyz_csv(path, lines);
}

void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& corrs) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path.string());
  const bool with_gt = corrs.gt_labels.has_value();
  out << (with_gt ? "ax,ay,az,bx,by,bz,gt_label\n" : "ax,ay,az,bx,by,bz\n");
  for (std::size_t i = 0; i < corrs.items.size(); ++i) {
    const auto& c = corrs.items[i];
    out << format_double(c.a.x()) << ',' << format_double(c.a.y()) << ','
        << format_double(c.a.z()) << ',' << format_double(c.b.x()) << ','
        << format_double(c.b.y()) << ',' << format_double(c.b.z());
    if (with_gt) out << ',' << (*corrs.gt_labels)[i];
    out << '\n';
  }
  if (!out) throw FileError("failed writing " + path.string());
}

CorrespondenceSet load_correspondences(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  CorrespondenceSet out;
  bool saw_gt = false, saw_plain = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6 && fields.size() != 7)
      fail_parse(path, ln + 1, "expected 6 or 7 comma-separated fields");
    double v[6];
    bool numeric = true;
    for (int k = 0; k < 6; ++k) numeric = numeric && parse_double(trim(fields[k]), v[k]);
    if (!numeric) {
      if (ln == 0) continue;  // header row
      fail_parse(path, ln + 1, "bad coordinate field");
    }
    for (int k = 0; k < 6; ++k)
      if (!std::isfinite(v[k])) fail_parse(path, ln + 1, "non-finite coordinate");
    Correspondence c{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
    if (fields.size() == 7) {
      long label = 0;
      if (!parse_long(trim(fields[6]), label)) fail_parse(path, ln + 1, "bad gt_label field");
      if (!out.gt_labels) out.gt_labels.emplace();
      out.gt_labels->push_back(static_cast<int>(label));
      saw_gt = true;
    } else {
      saw_plain = true;
    }
    out.items.push_back(c);
  }
  if (saw_gt && saw_plain)
    throw CoverageError(path.string() + ": rows disagree on the gt_label column");
  if (out.items.empty()) throw ParseError(path.string() + ": no correspondences");
  return out;
}

}  // namespace multireg
