#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "multireg/geometry.hpp"

namespace multireg {

struct EmParams {
  double tau = 1.5;            // spatial distance threshold (meters)
  int m_min = 4;               // minimum cluster size
  int t_iters = 10;            // EM iteration cap
  bool use_distance_term = true;
  double sigma_floor = 1e-4;   // per-cluster noise scale never drops below this
  double outlier_density = 0.01;  // uniform background density (per m^3)
  double outlier_prior = 0.1;  // initial mixing weight of the background
};

/// One motion hypothesis of the mixture: a pose, its noise scale, its mixing
/// weight and the responsibility-weighted centroid of its member source
/// points (the anchor for the spatial distance term). Mixing weights of all
/// hypotheses plus the background sum to 1.
struct Hypothesis {
  RigidTransform pose;
  double sigma = 0.0;
  double weight = 0.0;
  Point3 centroid = Point3::Zero();
};

/// n x (K+1) responsibility matrix; the last column is the background
/// component. Every row sums to 1.
using Responsibilities = Eigen::MatrixXd;

struct MultiModelEstimate {
  std::vector<Hypothesis> hypotheses;
  Labeling labeling;  // argmax assignment, -1 for background
  int iterations_run = 0;
};

/// Per-iteration diagnostics. Log-likelihoods are evaluated with the spatial
/// gates frozen at their E-step values, before pruning, so consecutive
/// (ll_before, ll_after) pairs obey the EM ascent property.
struct EmIterationStats {
  double ll_before = 0.0;
  double ll_after = 0.0;
  int survivors = 0;
  int pruned = 0;
};
struct EmTrace {
  std::vector<EmIterationStats> iterations;
};

/// Soft assignment. Row i, column j is proportional to
///   weight_j * N(residual(pose_j, c_i); 0, sigma_j^2 I_3) * gate_j(a_i)
/// where gate_j(a_i) is 1 when ||a_i - centroid_j|| <= tau and 1e-12
/// otherwise (identically 1 when the distance term is off). The background
/// column is proportional to (1 - sum weight_j) * outlier_density. Rows that
/// would normalize to zero fall back to pure background assignment.
Responsibilities e_step(const CorrespondenceSet& corrs, std::span<const Hypothesis> hypotheses,
                        const EmParams& params);

/// Re-estimates each hypothesis from its responsibility column: pose by
/// weighted Horn fit, sigma^2 = max(floor^2, weighted mean squared post-fit
/// residual / 3), weight = column mass / n, centroid = weighted source mean.
/// Hypotheses with column mass below m_min or a degenerate fit are dropped
/// and the surviving weights (plus background) renormalized.
std::vector<Hypothesis> m_step(const CorrespondenceSet& corrs, const Responsibilities& resp,
                               const EmParams& params);

/// Full solver: forms initial hypotheses by a hard-assignment M-step over the
/// init clusters, then alternates E and M for at most t_iters iterations,
/// additionally pruning hypotheses whose argmax membership falls below m_min.
/// Stops early once the argmax labeling is stable. Deterministic for fixed
/// inputs regardless of thread count; the seed is reserved for stochastic
/// variants and does not affect the current scheme.
MultiModelEstimate solve_em(const CorrespondenceSet& corrs, const Labeling& init,
                            const EmParams& params, std::uint64_t seed, EmTrace* trace = nullptr);

/// Data log-likelihood of the gated mixture, with gates evaluated at the
/// given frozen centroids (one per hypothesis). Exposed for the ascent tests.
double mixture_log_likelihood(const CorrespondenceSet& corrs,
                              std::span<const Hypothesis> hypotheses,
                              std::span<const Point3> gate_centroids, const EmParams& params);

}  // namespace multireg
