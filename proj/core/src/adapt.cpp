#include "bscca/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bscca/error.hpp"

namespace bscca {

AdaptState AdaptState::initial(const std::vector<double>& temperatures, Index p,
                               double tolerance, double scale) {
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "flatness tolerance w must lie in (0, 1)");
  }
  AdaptState adapt;
  const std::size_t k = temperatures.size();
  adapt.tau.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    adapt.tau[i] = std::clamp(std::log(scale * temperatures[i] / static_cast<double>(p)),
                              kTauMin, kTauMax);
  }
  adapt.log_c.assign(k, 0.0);
  adapt.visits.assign(k, 0);
  adapt.tolerance = tolerance;
  return adapt;
}

TemperingLadder AdaptState::ladder(const std::vector<double>& temperatures) const {
  TemperingLadder out;
  out.temperatures = temperatures;
  out.log_weights = log_c;
  out.step_sizes.resize(tau.size());
  std::transform(tau.begin(), tau.end(), out.step_sizes.begin(),
                 [](double t) { return std::exp(t); });
  return out;
}

void adapt_step_size(AdaptState& adapt, int level, double alpha) {
  const auto k = static_cast<std::size_t>(level);
  const double visits = static_cast<double>(std::max<std::int64_t>(adapt.visits.at(k), 1));
  const double gain = std::pow(visits, -0.6);
  adapt.tau[k] = std::clamp(adapt.tau[k] + gain * (alpha - AdaptState::kTargetAcceptance),
                            AdaptState::kTauMin, AdaptState::kTauMax);
}

void wang_landau_update(AdaptState& adapt, int level) {
  const auto k = static_cast<std::size_t>(level);
  adapt.log_c.at(k) += adapt.increment;
  adapt.visits.at(k) += 1;
}

bool flatness_check(AdaptState& adapt) {
  const double total =
      static_cast<double>(std::accumulate(adapt.visits.begin(), adapt.visits.end(), std::int64_t{0}));
  if (total <= 0.0) return false;
  const double levels = static_cast<double>(adapt.visits.size());
  double deviation = 0.0;
  for (auto v : adapt.visits) {
    deviation = std::max(deviation, std::abs(static_cast<double>(v) / total - 1.0 / levels));
  }
  if (deviation > adapt.tolerance / levels) return false;
  adapt.increment /= 2.0;
  std::fill(adapt.visits.begin(), adapt.visits.end(), 0);
  ++adapt.resets;
  return true;
}

void apply_adaptation(AdaptState& adapt, const IterationStats& stats, int new_level,
                      bool adapt_step_sizes) {
  wang_landau_update(adapt, new_level);
  if (adapt_step_sizes) adapt_step_size(adapt, stats.level, stats.mala_accept);
  flatness_check(adapt);
}

AdaptiveRun run_adaptive_chain(const GepPair& gep, const PriorConfig& prior,
                               const std::vector<double>& temperatures, Index iterations,
                               std::uint64_t seed, AdaptState initial,
                               const AdaptOptions& options) {
  prior.validate();
  if (iterations < 0) throw Error(ErrorKind::kInvalidConfig, "iterations must be >= 0");
  if (initial.size() != static_cast<int>(temperatures.size())) {
    throw Error(ErrorKind::kInvalidConfig, "adaptation state does not match the ladder");
  }
  initial.ladder(temperatures).validate();

  AdaptiveRun run;
  run.adapt = std::move(initial);
  Rng rng(seed);
  ChainState init = initial_state(gep.p(), rng);
  Chain chain(gep, prior, std::move(init), std::move(rng),
              SamplerOptions{options.batch_size, options.mala_steps});

  const auto levels = static_cast<std::size_t>(run.adapt.size());
  std::vector<double> accept_sum(levels, 0.0);
  std::vector<std::int64_t> accept_count(levels, 0);
  std::vector<std::int64_t> occupancy(levels, 0);

  run.trace.seed = seed;
  run.trace.states.reserve(static_cast<std::size_t>(iterations + 1));
  run.trace.stats.reserve(static_cast<std::size_t>(iterations));
  run.records.reserve(static_cast<std::size_t>(iterations));
  run.trace.states.push_back(chain.state());

  TemperingLadder ladder = run.adapt.ladder(temperatures);
  for (Index t = 0; t < iterations; ++t) {
    const IterationStats stats = chain.step(ladder);
    const int level = chain.state().level;
    const bool adapting = !options.freeze_after || t < *options.freeze_after;
    if (adapting) {
      apply_adaptation(run.adapt, stats, level, options.adapt_step_sizes);
      for (std::size_t k = 0; k < levels; ++k) {
        ladder.log_weights[k] = run.adapt.log_c[k];
        ladder.step_sizes[k] = std::exp(run.adapt.tau[k]);
      }
    }

    const auto mk = static_cast<std::size_t>(stats.level);
    accept_sum[mk] += stats.mala_accept;
    ++accept_count[mk];
    ++occupancy[static_cast<std::size_t>(level)];

    AdaptRecord record;
    record.iter = t + 1;
    record.level = level;
    const auto lk = static_cast<std::size_t>(level);
    record.acceptance_rate =
        accept_count[lk] > 0 ? accept_sum[lk] / static_cast<double>(accept_count[lk]) : 0.0;
    record.increment = run.adapt.increment;
    record.occupancy.resize(levels);
    for (std::size_t k = 0; k < levels; ++k) {
      record.occupancy[k] = static_cast<double>(occupancy[k]) / static_cast<double>(t + 1);
    }
    run.records.push_back(std::move(record));
    run.trace.stats.push_back(stats);
    run.trace.states.push_back(chain.state());
  }
  return run;
}

AdaptiveRun run_adaptive_chain(const GepPair& gep, const PriorConfig& prior,
                               const std::vector<double>& temperatures, Index iterations,
                               Index batch_size, std::uint64_t seed, double tolerance) {
  AdaptOptions options;
  options.batch_size = batch_size;
  return run_adaptive_chain(gep, prior, temperatures, iterations, seed,
                            AdaptState::initial(temperatures, gep.p(), tolerance), options);
}

}  // namespace bscca
