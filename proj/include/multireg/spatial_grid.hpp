#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "multireg/geometry.hpp"

namespace multireg {

/// Uniform hash grid over a point set. Two uses share it: radius-r
/// connectivity for Euclidean clustering (cell size = r, neighbors in the 27
/// surrounding cells) and exact nearest-neighbor queries for the metrics
/// (expanding shell search; exhaustive fallback for small sets and for
/// queries far outside the occupied cells). Non-owning: the points span must
/// outlive the grid.
class SpatialGrid {
 public:
  struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
  };
  struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
      std::uint64_t h = 0xCBF29CE484222325ull;
      for (std::uint64_t v : {static_cast<std::uint64_t>(k.x), static_cast<std::uint64_t>(k.y),
                              static_cast<std::uint64_t>(k.z)}) {
        h ^= v;
        h *= 0x100000001B3ull;
      }
      return static_cast<std::size_t>(h);
    }
  };

  SpatialGrid(std::span<const Point3> points, double cell_size)
      : points_(points), cell_(cell_size) {
    min_key_ = {0, 0, 0};
    max_key_ = {0, 0, 0};
    bool first = true;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const CellKey k = key_of(points_[i]);
      cells_[k].push_back(static_cast<int>(i));
      if (first) {
        min_key_ = max_key_ = k;
        first = false;
      } else {
        min_key_ = {std::min(min_key_.x, k.x), std::min(min_key_.y, k.y),
                    std::min(min_key_.z, k.z)};
        max_key_ = {std::max(max_key_.x, k.x), std::max(max_key_.y, k.y),
                    std::max(max_key_.z, k.z)};
      }
    }
  }

  double cell_size() const { return cell_; }

  CellKey key_of(const Point3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }

  const std::vector<int>* cell(const CellKey& k) const {
    const auto it = cells_.find(k);
    return it == cells_.end() ? nullptr : &it->second;
  }

  /// Index of the point closest to q, exact. Returns -1 on an empty grid.
  int nearest(const Point3& q) const {
    if (points_.empty()) return -1;
    const CellKey kq = key_of(q);
    if (points_.size() <= 32 || box_gap(kq) > 2) return nearest_exhaustive(q);

    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    const std::int64_t max_shell = farthest_shell(kq);
    for (std::int64_t shell = 0; shell <= max_shell; ++shell) {
      // A point whose cell is at Chebyshev distance >= shell from kq lies at
      // Euclidean distance >= (shell - 1) * cell size from q.
      if (best >= 0 && shell >= 1) {
        const double bound = static_cast<double>(shell - 1) * cell_;
        if (best_d2 <= bound * bound) break;
      }
      scan_shell(q, kq, shell, best, best_d2);
    }
    return best;
  }

  double nearest_distance(const Point3& q) const {
    const int i = nearest(q);
    return i < 0 ? std::numeric_limits<double>::infinity()
                 : (points_[static_cast<std::size_t>(i)] - q).norm();
  }

 private:
  static std::int64_t chebyshev(const CellKey& a, const CellKey& b) {
    return std::max({std::llabs(a.x - b.x), std::llabs(a.y - b.y), std::llabs(a.z - b.z)});
  }

  /// Chebyshev distance from kq to the occupied-cell bounding box (0 inside).
  std::int64_t box_gap(const CellKey& kq) const {
    const std::int64_t dx = std::max({min_key_.x - kq.x, kq.x - max_key_.x, std::int64_t{0}});
    const std::int64_t dy = std::max({min_key_.y - kq.y, kq.y - max_key_.y, std::int64_t{0}});
    const std::int64_t dz = std::max({min_key_.z - kq.z, kq.z - max_key_.z, std::int64_t{0}});
    return std::max({dx, dy, dz});
  }

  std::int64_t farthest_shell(const CellKey& kq) const {
    const std::int64_t fx = std::max(std::llabs(kq.x - min_key_.x), std::llabs(kq.x - max_key_.x));
    const std::int64_t fy = std::max(std::llabs(kq.y - min_key_.y), std::llabs(kq.y - max_key_.y));
    const std::int64_t fz = std::max(std::llabs(kq.z - min_key_.z), std::llabs(kq.z - max_key_.z));
    return std::max({fx, fy, fz});
  }

  int nearest_exhaustive(const Point3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double d2 = (points_[i] - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  void scan_cell(const Point3& q, const CellKey& k, int& best, double& best_d2) const {
    const auto it = cells_.find(k);
    if (it == cells_.end()) return;
    for (int i : it->second) {
      const double d2 = (points_[static_cast<std::size_t>(i)] - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
  }

  /// Visits the six faces of the Chebyshev shell, clamped to occupied bounds.
  void scan_shell(const Point3& q, const CellKey& kq, std::int64_t shell, int& best,
                  double& best_d2) const {
    if (shell == 0) {
      scan_cell(q, kq, best, best_d2);
      return;
    }
    const std::int64_t y_lo = std::max(kq.y - shell, min_key_.y);
    const std::int64_t y_hi = std::min(kq.y + shell, max_key_.y);
    const std::int64_t z_lo = std::max(kq.z - shell, min_key_.z);
    const std::int64_t z_hi = std::min(kq.z + shell, max_key_.z);
    for (const std::int64_t x : {kq.x - shell, kq.x + shell}) {
      if (x < min_key_.x || x > max_key_.x) continue;
      for (std::int64_t y = y_lo; y <= y_hi; ++y)
        for (std::int64_t z = z_lo; z <= z_hi; ++z) scan_cell(q, {x, y, z}, best, best_d2);
    }
    const std::int64_t x_lo = std::max(kq.x - shell + 1, min_key_.x);
    const std::int64_t x_hi = std::min(kq.x + shell - 1, max_key_.x);
    for (const std::int64_t y : {kq.y - shell, kq.y + shell}) {
      if (y < min_key_.y || y > max_key_.y) continue;
      for (std::int64_t x = x_lo; x <= x_hi; ++x)
        for (std::int64_t z = z_lo; z <= z_hi; ++z) scan_cell(q, {x, y, z}, best, best_d2);
    }
    const std::int64_t y_lo_in = std::max(kq.y - shell + 1, min_key_.y);
    const std::int64_t y_hi_in = std::min(kq.y + shell - 1, max_key_.y);
    for (const std::int64_t z : {kq.z - shell, kq.z + shell}) {
      if (z < min_key_.z || z > max_key_.z) continue;
      for (std::int64_t x = x_lo; x <= x_hi; ++x)
        for (std::int64_t y = y_lo_in; y <= y_hi_in; ++y) scan_cell(q, {x, y, z}, best, best_d2);
    }
  }

  std::span<const Point3> points_;
  double cell_;
  CellKey min_key_, max_key_;
  std::unordered_map<CellKey, std::vector<int>, CellKeyHash> cells_;
};

}  // namespace multireg
