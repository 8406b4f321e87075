#include "multireg/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "multireg/errors.hpp"
#include "multireg/horn.hpp"
#include "multireg/parallel.hpp"

namespace multireg {

namespace {

constexpr double kGateFloor = 1e-12;

void validate(const EmParams& p) {
  if (!(p.tau > 0.0)) throw ConfigError("EmParams.tau must be > 0");
  if (p.m_min < 3) throw ConfigError("EmParams.m_min must be >= 3");
  if (p.t_iters < 1) throw ConfigError("EmParams.t_iters must be >= 1");
  if (!(p.sigma_floor > 0.0)) throw ConfigError("EmParams.sigma_floor must be > 0");
  if (!(p.outlier_density > 0.0)) throw ConfigError("EmParams.outlier_density must be > 0");
  if (p.outlier_prior < 0.0 || p.outlier_prior >= 1.0)
    throw ConfigError("EmParams.outlier_prior must be in [0, 1)");
}

double background_weight(std::span<const Hypothesis> hyps) {
  double s = 0.0;
  for (const auto& h : hyps) s += h.weight;
  return std::max(0.0, 1.0 - s);
}

/// Precomputed per-component constants for density evaluation.
struct ComponentEval {
  Eigen::Matrix3d rotation;
  Point3 translation;
  Point3 centroid;
  double weight = 0.0;
  double norm = 0.0;    // (2 pi sigma^2)^(-3/2)
  double inv2s2 = 0.0;  // 1 / (2 sigma^2)
};

ComponentEval make_eval(const Hypothesis& h) {
  const double s2 = h.sigma * h.sigma;
  return {h.pose.rotation(), h.pose.translation(), h.centroid, h.weight,
          std::pow(2.0 * M_PI * s2, -1.5), 0.5 / s2};
}

double component_density(const ComponentEval& c, const Correspondence& item, double tau2,
                         bool use_gate) {
  const double d2 = (item.b - c.rotation * item.a - c.translation).squaredNorm();
  double v = c.weight * c.norm * std::exp(-d2 * c.inv2s2);
  if (use_gate && (item.a - c.centroid).squaredNorm() > tau2) v *= kGateFloor;
  return v;
}

struct UpdatedComponent {
  Hypothesis hyp;
  double soft_count = 0.0;
  bool degenerate = false;
};

/// Pure M-step update of every column, before any pruning.
std::vector<UpdatedComponent> update_components(const CorrespondenceSet& corrs,
                                                const Responsibilities& resp,
                                                const EmParams& params) {
  const auto n = corrs.size();
  const auto k = static_cast<std::size_t>(resp.cols()) - 1;
  std::vector<UpdatedComponent> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    auto& comp = out[j];
    comp.soft_count = resp.col(static_cast<Eigen::Index>(j)).sum();
    if (!(comp.soft_count > 0.0)) {
      comp.degenerate = true;
      continue;
    }
    const std::span<const double> weights{resp.col(static_cast<Eigen::Index>(j)).data(), n};
    try {
      comp.hyp.pose = fit_pose(WeightedCorrespondences{corrs.items, weights});
    } catch (const DegenerateInput&) {
      comp.degenerate = true;
      continue;
    }
    double wd2 = 0.0;
    Point3 centroid = Point3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights[i];
      if (w == 0.0) continue;
      const double d = residual(comp.hyp.pose, corrs.items[i]);
      wd2 += w * d * d;
      centroid += w * corrs.items[i].a;
    }
    comp.hyp.sigma = std::max(params.sigma_floor, std::sqrt(wd2 / (3.0 * comp.soft_count)));
    comp.hyp.centroid = centroid / comp.soft_count;
    comp.hyp.weight = comp.soft_count / static_cast<double>(n);
  }
  return out;
}

void renormalize_weights(std::vector<Hypothesis>& hyps, double background_mass) {
  double s = background_mass;
  for (const auto& h : hyps) s += h.weight;
  if (s <= 0.0) return;
  for (auto& h : hyps) h.weight /= s;
}

}  // namespace

Responsibilities e_step(const CorrespondenceSet& corrs, std::span<const Hypothesis> hypotheses,
                        const EmParams& params) {
  if (hypotheses.empty()) throw NoValidCluster("e_step: no hypotheses");
  const auto n = corrs.size();
  const auto k = hypotheses.size();
  const double tau2 = params.tau * params.tau;
  const double background_mass = background_weight(hypotheses) * params.outlier_density;

  std::vector<ComponentEval> evals;
  evals.reserve(k);
  for (const auto& h : hypotheses) evals.push_back(make_eval(h));

  Responsibilities resp(n, k + 1);
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      double row_sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double v =
            component_density(evals[j], corrs.items[i], tau2, params.use_distance_term);
        resp(row, static_cast<Eigen::Index>(j)) = v;
        row_sum += v;
      }
      resp(row, static_cast<Eigen::Index>(k)) = background_mass;
      row_sum += background_mass;
      if (row_sum > 0.0 && std::isfinite(row_sum)) {
        resp.row(row) /= row_sum;
      } else {
        resp.row(row).setZero();
        resp(row, static_cast<Eigen::Index>(k)) = 1.0;
      }
    }
  });
  return resp;
}

std::vector<Hypothesis> m_step(const CorrespondenceSet& corrs, const Responsibilities& resp,
                               const EmParams& params) {
  validate(params);
  if (resp.rows() != static_cast<Eigen::Index>(corrs.size()) || resp.cols() < 2)
    throw ConfigError("m_step: responsibility shape mismatch");
  const auto updated = update_components(corrs, resp, params);
  const double background_mass =
      resp.col(resp.cols() - 1).sum() / static_cast<double>(corrs.size());

  std::vector<Hypothesis> survivors;
  for (const auto& comp : updated) {
    if (comp.degenerate || comp.soft_count < static_cast<double>(params.m_min)) continue;
    survivors.push_back(comp.hyp);
  }
  renormalize_weights(survivors, background_mass);
  return survivors;
}

double mixture_log_likelihood(const CorrespondenceSet& corrs,
                              std::span<const Hypothesis> hypotheses,
                              std::span<const Point3> gate_centroids, const EmParams& params) {
  const double tau2 = params.tau * params.tau;
  const double background_mass = background_weight(hypotheses) * params.outlier_density;
  double ll = 0.0;
  for (const auto& item : corrs.items) {
    double mix = background_mass;
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
      ComponentEval eval = make_eval(hypotheses[j]);
      eval.centroid = gate_centroids[j];
      mix += component_density(eval, item, tau2, params.use_distance_term);
    }
    ll += std::log(mix);
  }
  return ll;
}

MultiModelEstimate solve_em(const CorrespondenceSet& corrs, const Labeling& init,
                            const EmParams& params, std::uint64_t seed, EmTrace* trace) {
  (void)seed;  // the scheme is deterministic; kept for interface stability
  validate(params);
  const auto n = corrs.size();
  if (n == 0) throw NoValidCluster("solve_em: empty correspondence set");
  if (init.labels.size() != n) throw ConfigError("solve_em: init labeling length mismatch");

  // Hard-assignment M-step over the init clusters.
  Labeling compact_init = init;
  compact_init.compact();
  const auto k0 = static_cast<std::size_t>(compact_init.cluster_count());
  Responsibilities hard = Responsibilities::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(k0 + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const int l = compact_init.labels[i];
    hard(static_cast<Eigen::Index>(i),
         l < 0 ? static_cast<Eigen::Index>(k0) : static_cast<Eigen::Index>(l)) = 1.0;
  }
  std::vector<Hypothesis> hyps;
  {
    const auto updated = update_components(corrs, hard, params);
    double kept_mass = 0.0;
    for (const auto& comp : updated) {
      if (comp.degenerate || comp.soft_count < static_cast<double>(params.m_min)) continue;
      hyps.push_back(comp.hyp);
      kept_mass += comp.soft_count;
    }
    if (hyps.empty()) throw NoValidCluster("solve_em: no initial cluster admits a pose fit");
    for (auto& h : hyps) {
      h.weight = (1.0 - params.outlier_prior) * (h.weight * static_cast<double>(n)) / kept_mass;
    }
  }

  MultiModelEstimate estimate;
  estimate.labeling.labels.assign(n, Labeling::kOutlier);
  std::vector<int> prev_labels;

  for (int iteration = 1; iteration <= params.t_iters; ++iteration) {
    const Responsibilities resp = e_step(corrs, hyps, params);
    const auto k = hyps.size();

    EmIterationStats stats;
    std::vector<Point3> frozen_centroids;
    if (trace) {
      frozen_centroids.reserve(k);
      for (const auto& h : hyps) frozen_centroids.push_back(h.centroid);
      stats.ll_before = mixture_log_likelihood(corrs, hyps, frozen_centroids, params);
    }

    // Argmax membership counts of the current responsibilities.
    std::vector<int> argmax_count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      int best = -1;
      double best_v = resp(row, static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < k; ++j) {
        const double v = resp(row, static_cast<Eigen::Index>(j));
        if (v > best_v) {
          best_v = v;
          best = static_cast<int>(j);
        }
      }
      if (best >= 0) ++argmax_count[static_cast<std::size_t>(best)];
    }

    const auto updated = update_components(corrs, resp, params);
    if (trace) {
      std::vector<Hypothesis> pre_prune;
      for (const auto& comp : updated)
        if (!comp.degenerate) pre_prune.push_back(comp.hyp);
      stats.ll_after = mixture_log_likelihood(corrs, pre_prune, frozen_centroids, params);
    }

    // Keep components with enough soft mass and enough argmax members.
    std::vector<int> kept;
    std::vector<Hypothesis> next;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& comp = updated[j];
      if (comp.degenerate || comp.soft_count < static_cast<double>(params.m_min) ||
          argmax_count[j] < params.m_min)
        continue;
      kept.push_back(static_cast<int>(j));
      next.push_back(comp.hyp);
    }
    const double background_mass =
        resp.col(static_cast<Eigen::Index>(k)).sum() / static_cast<double>(n);
    renormalize_weights(next, background_mass);

    estimate.iterations_run = iteration;
    if (trace) {
      stats.survivors = static_cast<int>(next.size());
      stats.pruned = static_cast<int>(k - next.size());
      trace->iterations.push_back(stats);
    }

    if (next.empty()) {
      hyps.clear();
      std::fill(estimate.labeling.labels.begin(), estimate.labeling.labels.end(),
                Labeling::kOutlier);
      break;
    }

    // Argmax labeling over the surviving columns plus background. Points whose
    // argmax column was pruned are reassigned among the survivors here.
    std::vector<int> labels(n, Labeling::kOutlier);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      int best = Labeling::kOutlier;
      double best_v = resp(row, static_cast<Eigen::Index>(k));
      for (std::size_t s = 0; s < kept.size(); ++s) {
        const double v = resp(row, static_cast<Eigen::Index>(kept[s]));
        if (v > best_v) {
          best_v = v;
          best = static_cast<int>(s);
        }
      }
      labels[i] = best;
    }

    hyps = std::move(next);
    estimate.labeling.labels = labels;
    if (labels == prev_labels) break;
    prev_labels = std::move(labels);
  }

  estimate.hypotheses = hyps;
  return estimate;
}

}  // namespace multireg
