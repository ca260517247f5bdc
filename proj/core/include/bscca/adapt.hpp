#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bscca/sampler.hpp"

namespace bscca {

/// Adaptation state: log step sizes tau (eta_k = exp(tau_k)), log weights,
/// visit counts since the last stage reset, the Wang-Landau increment and
/// the flatness tolerance.
struct AdaptState {
  std::vector<double> tau;
  std::vector<double> log_c;
  std::vector<std::int64_t> visits;
  double increment = 10.0;
  double tolerance = 0.2;
  int resets = 0;

  static constexpr double kTauMin = -20.0;
  static constexpr double kTauMax = 5.0;
  static constexpr double kTargetAcceptance = 0.3;

  int size() const { return static_cast<int>(tau.size()); }

  /// tau_k = log(scale * t_k / p), log_c = 0, v = 0.
  static AdaptState initial(const std::vector<double>& temperatures, Index p,
                            double tolerance = 0.2, double scale = 0.5);

  /// Ladder with eta = exp(tau) and the current log weights.
  TemperingLadder ladder(const std::vector<double>& temperatures) const;
};

/// tau_k += max(v_k, 1)^-0.6 (alpha - 0.3), clamped to [kTauMin, kTauMax].
void adapt_step_size(AdaptState& adapt, int level, double alpha);

/// log_c[level] += increment and visits[level] += 1.
void wang_landau_update(AdaptState& adapt, int level);

/// Halves the increment and clears the visit counts when the occupancy is
/// flat to within tolerance / K. Returns whether a reset fired.
bool flatness_check(AdaptState& adapt);

struct AdaptOptions {
  Index batch_size = 100;
  int mala_steps = 1;
  bool adapt_step_sizes = true;
  /// Stop adapting from this iteration on (nullopt: adapt throughout).
  std::optional<Index> freeze_after;
};

/// Per-iteration adaptation diagnostics.
struct AdaptRecord {
  Index iter = 0;
  int level = 0;                 ///< level after the iteration
  double acceptance_rate = 0.0;  ///< running mean MALA acceptance at that level
  double increment = 0.0;
  std::vector<double> occupancy; ///< running fraction of iterations per level
};

struct AdaptiveRun {
  ChainTrace trace;
  AdaptState adapt;
  std::vector<AdaptRecord> records;
};

/// Adaptive simulated tempering from the initial law. Each iteration runs
/// the sampler steps under the current (eta, c), then the Wang-Landau
/// update, the step-size update and the flatness check.
AdaptiveRun run_adaptive_chain(const GepPair& gep, const PriorConfig& prior,
                               const std::vector<double>& temperatures, Index iterations,
                               std::uint64_t seed, AdaptState initial,
                               const AdaptOptions& options = {});

AdaptiveRun run_adaptive_chain(const GepPair& gep, const PriorConfig& prior,
                               const std::vector<double>& temperatures, Index iterations,
                               Index batch_size, std::uint64_t seed, double tolerance = 0.2);

/// The adaptation updates applied after one sampler iteration.
void apply_adaptation(AdaptState& adapt, const IterationStats& stats, int new_level,
                      bool adapt_step_sizes);

}  // namespace bscca
