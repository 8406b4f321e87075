#include "multireg/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "multireg/errors.hpp"
#include "multireg/horn.hpp"
#include "multireg/rng.hpp"

namespace multireg {

namespace {

std::vector<Correspondence> gather(const CorrespondenceSet& corrs, std::span<const int> indices) {
  std::vector<Correspondence> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(corrs.items[static_cast<std::size_t>(i)]);
  return out;
}

double rms_residual(const CorrespondenceSet& corrs, std::span<const int> indices,
                    const RigidTransform& pose) {
  double sum = 0.0;
  for (int i : indices) {
    const double d = residual(pose, corrs.items[static_cast<std::size_t>(i)]);
    sum += d * d;
  }
  return indices.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(indices.size()));
}

Point3 mean_source(const CorrespondenceSet& corrs, std::span<const int> indices) {
  Point3 sum = Point3::Zero();
  for (int i : indices) sum += corrs.items[static_cast<std::size_t>(i)].a;
  return indices.empty() ? sum : Point3(sum / static_cast<double>(indices.size()));
}

Hypothesis make_hypothesis(const CorrespondenceSet& corrs, std::span<const int> indices,
                           const RigidTransform& pose) {
  Hypothesis h;
  h.pose = pose;
  h.sigma = rms_residual(corrs, indices, pose);
  h.weight = static_cast<double>(indices.size()) / static_cast<double>(corrs.size());
  h.centroid = mean_source(corrs, indices);
  return h;
}

}  // namespace

MultiModelEstimate solve_naive(const CorrespondenceSet& corrs, const Labeling& init) {
  if (corrs.size() == 0) throw NoValidCluster("solve_naive: empty correspondence set");
  if (init.labels.size() != corrs.size())
    throw ConfigError("solve_naive: init labeling length mismatch");

  Labeling compact_init = init;
  compact_init.compact();

  MultiModelEstimate est;
  est.labeling.labels.assign(corrs.size(), Labeling::kOutlier);
  est.iterations_run = 1;
  for (const auto& members : compact_init.members()) {
    if (members.size() < 3) continue;
    RigidTransform pose;
    try {
      pose = fit_pose(gather(corrs, members));
    } catch (const DegenerateInput&) {
      continue;
    }
    const int id = static_cast<int>(est.hypotheses.size());
    est.hypotheses.push_back(make_hypothesis(corrs, members, pose));
    for (int i : members) est.labeling.labels[static_cast<std::size_t>(i)] = id;
  }
  return est;
}

MultiModelEstimate solve_sransac(const CorrespondenceSet& corrs, const SransacParams& params) {
  if (corrs.size() == 0) throw NoValidCluster("solve_sransac: empty correspondence set");
  if (!(params.inlier_threshold > 0.0))
    throw ConfigError("SransacParams.inlier_threshold must be > 0");
  if (params.max_iterations < 1) throw ConfigError("SransacParams.max_iterations must be >= 1");

  MultiModelEstimate est;
  est.labeling.labels.assign(corrs.size(), Labeling::kOutlier);
  std::vector<int> remaining(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) remaining[i] = static_cast<int>(i);

  Rng rng(params.seed);  // one shared generator for the whole invocation
  const int min_keep = std::max(params.min_inliers_to_continue, 3);

  while (remaining.size() >= 3) {
    std::vector<int> best_consensus;
    RigidTransform best_pose;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
      // Minimal sample of 3 distinct correspondences, uniform without
      // replacement.
      const std::size_t m = remaining.size();
      std::size_t s0 = rng.uniform_index(m);
      std::size_t s1 = rng.uniform_index(m);
      while (s1 == s0) s1 = rng.uniform_index(m);
      std::size_t s2 = rng.uniform_index(m);
      while (s2 == s0 || s2 == s1) s2 = rng.uniform_index(m);
      const std::array<Correspondence, 3> sample{
          corrs.items[static_cast<std::size_t>(remaining[s0])],
          corrs.items[static_cast<std::size_t>(remaining[s1])],
          corrs.items[static_cast<std::size_t>(remaining[s2])]};
      RigidTransform pose;
      try {
        pose = fit_pose(std::span<const Correspondence>{sample});
      } catch (const DegenerateInput&) {
        continue;
      }
      std::vector<int> consensus;
      for (int idx : remaining) {
        if (residual(pose, corrs.items[static_cast<std::size_t>(idx)]) < params.inlier_threshold)
          consensus.push_back(idx);
      }
      if (consensus.size() > best_consensus.size()) {
        best_consensus = std::move(consensus);
        best_pose = pose;
      }
    }
    if (best_consensus.size() < static_cast<std::size_t>(min_keep)) break;

    RigidTransform pose = best_pose;
    try {
      pose = fit_pose(gather(corrs, best_consensus));
    } catch (const DegenerateInput&) {
      // keep the minimal-sample pose
    }
    const int id = static_cast<int>(est.hypotheses.size());
    est.hypotheses.push_back(make_hypothesis(corrs, best_consensus, pose));
    for (int i : best_consensus) est.labeling.labels[static_cast<std::size_t>(i)] = id;

    std::vector<int> next;
    next.reserve(remaining.size() - best_consensus.size());
    std::size_t c = 0;  // both lists are sorted
    for (int idx : remaining) {
      if (c < best_consensus.size() && best_consensus[c] == idx) {
        ++c;
        continue;
      }
      next.push_back(idx);
    }
    remaining = std::move(next);
    ++est.iterations_run;
  }
  return est;
}

double preference(double d, double tau_t) {
  return d <= 5.0 * tau_t ? std::exp(-d / tau_t) : 0.0;
}

double tanimoto_distance(std::span<const double> u, std::span<const double> v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  const double denom = nu + nv - dot;
  if (denom <= 0.0) return 1.0;  // both all-zero
  return 1.0 - dot / denom;
}

namespace {

struct TlCluster {
  std::vector<int> members;  // sorted
  std::optional<RigidTransform> pose;
};

std::optional<RigidTransform> try_fit(const CorrespondenceSet& corrs,
                                      std::span<const int> members) {
  if (members.size() < 3) return std::nullopt;
  try {
    return fit_pose(gather(corrs, members));
  } catch (const DegenerateInput&) {
    return std::nullopt;
  }
}

}  // namespace

MultiModelEstimate solve_tlinkage(const CorrespondenceSet& corrs, const Labeling& init,
                                  const TlinkageParams& params) {
  if (corrs.size() == 0) throw NoValidCluster("solve_tlinkage: empty correspondence set");
  if (init.labels.size() != corrs.size())
    throw ConfigError("solve_tlinkage: init labeling length mismatch");
  if (!(params.tau_t > 0.0)) throw ConfigError("TlinkageParams.tau_t must be > 0");
  if (!(params.merge_stop > 0.0 && params.merge_stop <= 1.0))
    throw ConfigError("TlinkageParams.merge_stop must be in (0, 1]");

  const auto n = corrs.size();
  Labeling compact_init = init;
  compact_init.compact();

  std::vector<TlCluster> clusters;
  for (auto& members : compact_init.members()) {
    if (members.empty()) continue;
    TlCluster c;
    c.members = std::move(members);
    c.pose = try_fit(corrs, c.members);
    clusters.push_back(std::move(c));
  }
  // Init-outlier points never join a cluster; they stay background.

  // psi[j][i]: preference of point i for cluster j's pose (0 without a pose).
  auto point_column = [&](const TlCluster& c) {
    std::vector<double> col(n, 0.0);
    if (c.pose) {
      for (std::size_t i = 0; i < n; ++i)
        col[i] = preference(residual(*c.pose, corrs.items[i]), params.tau_t);
    }
    return col;
  };
  std::vector<std::vector<double>> psi;
  psi.reserve(clusters.size());
  for (const auto& c : clusters) psi.push_back(point_column(c));

  // Cluster preference: element-wise minimum over member points.
  auto cluster_pref_entry = [&](const TlCluster& c, std::size_t j) {
    double m = std::numeric_limits<double>::infinity();
    for (int i : c.members) m = std::min(m, psi[j][static_cast<std::size_t>(i)]);
    return m;
  };
  auto cluster_pref = [&](const TlCluster& c) {
    std::vector<double> pref(clusters.size());
    for (std::size_t j = 0; j < clusters.size(); ++j) pref[j] = cluster_pref_entry(c, j);
    return pref;
  };
  std::vector<std::vector<double>> prefs;
  prefs.reserve(clusters.size());
  for (const auto& c : clusters) prefs.push_back(cluster_pref(c));

  int merges = 0;
  while (clusters.size() >= 2) {
    double min_dist = std::numeric_limits<double>::infinity();
    std::size_t mu = 0, mv = 0;
    for (std::size_t u = 0; u + 1 < clusters.size(); ++u) {
      for (std::size_t v = u + 1; v < clusters.size(); ++v) {
        const double d = tanimoto_distance(prefs[u], prefs[v]);
        if (d < min_dist) {  // strict: ties keep the smallest (u, v)
          min_dist = d;
          mu = u;
          mv = v;
        }
      }
    }
    if (!(min_dist < params.merge_stop)) break;

    // Merge mv into mu, drop column/row mv, refit pose and preferences.
    std::vector<int> merged;
    merged.reserve(clusters[mu].members.size() + clusters[mv].members.size());
    std::merge(clusters[mu].members.begin(), clusters[mu].members.end(),
               clusters[mv].members.begin(), clusters[mv].members.end(),
               std::back_inserter(merged));
    clusters[mu].members = std::move(merged);
    clusters[mu].pose = try_fit(corrs, clusters[mu].members);

    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(mv));
    psi.erase(psi.begin() + static_cast<std::ptrdiff_t>(mv));
    prefs.erase(prefs.begin() + static_cast<std::ptrdiff_t>(mv));
    for (auto& p : prefs) p.erase(p.begin() + static_cast<std::ptrdiff_t>(mv));

    psi[mu] = point_column(clusters[mu]);
    for (std::size_t c = 0; c < clusters.size(); ++c)
      prefs[c][mu] = cluster_pref_entry(clusters[c], mu);
    prefs[mu] = cluster_pref(clusters[mu]);
    ++merges;
  }

  MultiModelEstimate est;
  est.labeling.labels.assign(n, Labeling::kOutlier);
  est.iterations_run = merges;
  for (const auto& c : clusters) {
    if (c.members.size() < 3 || !c.pose) continue;
    const int id = static_cast<int>(est.hypotheses.size());
    est.hypotheses.push_back(make_hypothesis(corrs, c.members, *c.pose));
    for (int i : c.members) est.labeling.labels[static_cast<std::size_t>(i)] = id;
  }
  return est;
}

}  // namespace multireg
