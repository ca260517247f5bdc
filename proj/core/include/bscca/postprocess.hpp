#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bscca/model.hpp"
#include "bscca/sampler.hpp"

namespace bscca {

/// Iterations t with ceil(3N/4) <= t <= N and k^(t) = 1. Throws kEmptySample
/// when none qualify.
std::vector<Index> extract_posterior_samples(const ChainTrace& trace, Index iterations);
std::vector<Index> extract_posterior_samples(std::span<const Index> iters,
                                             std::span<const int> levels, Index iterations);

/// Copies the selected states out of a trace.
std::vector<ChainState> gather_states(const ChainTrace& trace, std::span<const Index> indices);

/// Unit-normalized per-sample estimates v^(t) = theta o delta, split at p_x.
struct PerSampleEstimates {
  std::vector<Vector> vx;
  std::vector<Vector> vy;
  std::vector<Index> kept;  ///< positions within the input that produced an estimate
  Index skipped = 0;        ///< samples with an empty x or y block
};

PerSampleEstimates per_sample_estimates(std::span<const ChainState> samples, Index px);

/// Most frequent exact delta; ties go to the pattern seen first.
Support support_mode(std::span<const ChainState> samples);

/// Mean of the delta_bar-masked unit estimates after aligning each sample's
/// sign to the first, with each block renormalized.
std::pair<Vector, Vector> point_estimate(std::span<const ChainState> samples,
                                         const Support& delta_bar, Index px);

/// min(|v - v*|^2, |v + v*|^2).
double mse(const VectorRef& v, const VectorRef& v_star);

struct Rates {
  double tpr = 0.0;
  double tnr = 0.0;
};

/// Support recovery rates; zero means exactly zero.
Rates tpr_tnr(const VectorRef& v, const VectorRef& v_star);

/// Coordinatewise mean of delta.
Vector inclusion_probabilities(std::span<const ChainState> samples);

struct Truth {
  Vector vx;
  Vector vy;
};

struct EstimateReport {
  Support delta_bar;
  Vector vx_bar;
  Vector vy_bar;
  Vector inclusion_probs;
  Index samples = 0;
  Index skipped = 0;
  // Posterior averages over the retained samples (filled when truth given).
  std::optional<double> mse_x, mse_y, tpr_x, tpr_y, tnr_x, tnr_y;
  // The same metrics for the point estimate.
  std::optional<double> point_mse_x, point_mse_y, point_tpr_x, point_tpr_y, point_tnr_x,
      point_tnr_y;
};

/// Full output processing of a set of post-burn-in states.
EstimateReport build_report(std::span<const ChainState> samples, Index px,
                            const std::optional<Truth>& truth = std::nullopt);

/// Convenience: burn-in selection then build_report.
EstimateReport build_report(const ChainTrace& trace, Index px,
                            const std::optional<Truth>& truth = std::nullopt);

}  // namespace bscca
