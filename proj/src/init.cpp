#include "multireg/init.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "multireg/errors.hpp"
#include "multireg/spatial_grid.hpp"

namespace multireg {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

Labeling labels_from_components(std::span<const Point3> points, DisjointSets& sets) {
  Labeling out;
  out.labels.assign(points.size(), Labeling::kOutlier);
  std::map<std::size_t, int> root_to_label;
  int next = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t root = sets.find(i);
    auto [it, inserted] = root_to_label.emplace(root, next);
    if (inserted) ++next;
    out.labels[i] = it->second;
  }
  return out;
}

/// Connected components of the radius-r graph (distance <= r), via a grid
/// with cell size r and pair checks over the 27 surrounding cells.
Labeling cluster_at_radius(std::span<const Point3> points, double r, int* count) {
  DisjointSets sets(points.size());
  if (r <= 0.0) {
    // Only exactly coincident points are connected.
    std::map<std::array<double, 3>, std::size_t> seen;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::array<double, 3> key{points[i].x(), points[i].y(), points[i].z()};
      auto [it, inserted] = seen.emplace(key, i);
      if (!inserted) sets.unite(it->second, i);
    }
  } else {
    const SpatialGrid grid(points, r);
    const double r2 = r * r;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto k = grid.key_of(points[i]);
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            const auto* cell = grid.cell({k.x + dx, k.y + dy, k.z + dz});
            if (!cell) continue;
            for (int j : *cell) {
              const auto ju = static_cast<std::size_t>(j);
              if (ju <= i) continue;
              if (sets.find(i) == sets.find(ju)) continue;
              if ((points[i] - points[ju]).squaredNorm() <= r2) sets.unite(i, ju);
            }
          }
        }
      }
    }
  }
  Labeling labeling = labels_from_components(points, sets);
  if (count) *count = labeling.cluster_count();
  return labeling;
}

}  // namespace

EuclideanClusteringResult euclidean_clusters(std::span<const Point3> points, int target_count) {
  if (points.empty()) throw EmptySet("euclidean_clusters: no points");
  const auto n = static_cast<int>(points.size());
  if (target_count < 1 || target_count > n)
    throw ConfigError("euclidean_clusters: target_count must be in [1, n]");

  Point3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diagonal = (hi - lo).norm();

  const auto within = [target_count](int count, double fraction) {
    return std::abs(count - target_count) <= fraction * target_count;
  };

  EuclideanClusteringResult best;
  int best_gap = std::numeric_limits<int>::max();
  const auto consider = [&](Labeling&& labeling, int count, double radius) {
    const int gap = std::abs(count - target_count);
    if (gap < best_gap) {
      best_gap = gap;
      best.labeling = std::move(labeling);
      best.cluster_count = count;
      best.radius = radius;
    }
  };

  double r_lo = 0.0;  // count(0) >= target since target <= n (up to duplicates)
  double r_hi = diagonal > 0.0 ? diagonal : 1.0;
  for (int iter = 0; iter < 40; ++iter) {
    const double r = 0.5 * (r_lo + r_hi);
    int count = 0;
    Labeling labeling = cluster_at_radius(points, r, &count);
    consider(std::move(labeling), count, r);
    if (within(count, 0.10)) {
      best.target_unreachable = false;
      return best;
    }
    if (count > target_count)
      r_lo = r;
    else
      r_hi = r;
  }
  best.target_unreachable = !within(best.cluster_count, 0.50);
  return best;
}

Labeling load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("load_labels: cannot open " + path.string());

  std::vector<std::pair<long, long>> rows;
  std::string line;
  std::size_t line_no = 0;
  long max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'index,label'");
    const std::string_view first(line.data(), comma);
    const std::string_view second(line.data() + comma + 1, line.size() - comma - 1);
    long index = 0, label = 0;
    const auto r1 = std::from_chars(first.data(), first.data() + first.size(), index);
    if (r1.ec != std::errc{} || r1.ptr != first.data() + first.size()) {
      if (line_no == 1) continue;  // optional header row
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad index field");
    }
    const auto r2 = std::from_chars(second.data(), second.data() + second.size(), label);
    if (r2.ec != std::errc{} || r2.ptr != second.data() + second.size())
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad label field");
    if (index < 0)
      throw CoverageError(path.string() + ":" + std::to_string(line_no) + ": negative index");
    rows.emplace_back(index, label);
    max_index = std::max(max_index, index);
  }
  if (rows.empty()) throw ParseError(path.string() + ": no label rows");

  const auto n = static_cast<std::size_t>(max_index + 1);
  if (rows.size() != n)
    throw CoverageError(path.string() + ": got " + std::to_string(rows.size()) +
                        " rows for indices 0.." + std::to_string(max_index));
  Labeling out;
  out.labels.assign(n, Labeling::kOutlier);
  std::vector<bool> seen(n, false);
  for (const auto& [index, label] : rows) {
    const auto i = static_cast<std::size_t>(index);
    if (seen[i]) throw CoverageError(path.string() + ": duplicate index " + std::to_string(index));
    seen[i] = true;
    out.labels[i] = static_cast<int>(label);
  }
  return out;
}

}  // namespace multireg
