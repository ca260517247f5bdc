#pragma once

#include <cstdint>
#include <vector>

#include "bscca/model.hpp"
#include "bscca/rng.hpp"

namespace bscca {

/// The random coordinate subset updated by one Gibbs sweep, in draw order.
struct GibbsPlan {
  std::vector<Index> indices;
};

struct SamplerOptions {
  Index batch_size = 100;  ///< J; clipped to p
  int mala_steps = 1;      ///< MALA applications per outer iteration
};

/// min(100, p).
Index default_batch_size(Index p);

/// J distinct indices by partial Fisher-Yates.
GibbsPlan draw_gibbs_plan(Index p, Index batch_size, Rng& rng);

/// Log odds of delta_j = 1 given everything else at the state's temperature.
/// +infinity when j is the only active coordinate.
double gibbs_log_odds(Index j, const ChainState& state, const QuadraticCache& cache,
                      const GepPair& gep, const PriorConfig& prior, const TemperingLadder& ladder);

/// Success probability q_j of the conditional Bernoulli for delta_j.
double gibbs_success_prob(Index j, const ChainState& state, const GepPair& gep,
                          const PriorConfig& prior, const TemperingLadder& ladder);
double gibbs_success_prob(Index j, const ChainState& state, const QuadraticCache& cache,
                          const GepPair& gep, const PriorConfig& prior,
                          const TemperingLadder& ladder);

/// Logistic function evaluated without overflow.
double logistic(double log_odds);

/// Sequential single-site updates over plan.indices, each q_j recomputed
/// from the partially updated delta. Keeps cache in sync with state.
void gibbs_update_delta(ChainState& state, QuadraticCache& cache, const GibbsPlan& plan,
                        Rng& rng, const GepPair& gep, const PriorConfig& prior,
                        const TemperingLadder& ladder);

/// Point of a MALA chain on the selected block: position, log density and
/// gradient. valid is false where the quotient is undefined.
struct MalaPoint {
  Vector u;
  Vector grad;
  double log_density = 0.0;
  bool valid = false;
};

MalaPoint mala_point(const SelectedBlock& block, Vector u);

/// u + eta * grad.
Vector mala_mean(const MalaPoint& point, double eta);

/// log of the MALA acceptance ratio for moving from current to proposal.
double mala_log_accept(const MalaPoint& current, const MalaPoint& proposal, double eta);

struct MalaOutcome {
  double accept_prob = 0.0;
  bool accepted = false;
};

/// Redraws unselected coordinates from N(0, t_k / rho0) and applies
/// options.mala_steps MALA steps to the selected block with step eta_k.
/// Returns the acceptance probability of the last step. Rebuilds cache.
MalaOutcome mala_update_theta(ChainState& state, QuadraticCache& cache, Rng& rng,
                              const GepPair& gep, const PriorConfig& prior,
                              const TemperingLadder& ladder, int mala_steps = 1);

/// Neighbour proposed from level with reflection at the ends; left when
/// w <= 0.5 in the interior.
int propose_level(int level, int levels, double w);

/// Log Metropolis-Hastings ratio for moving the temperature from -> to,
/// given the untempered log quasi-posterior, including the proposal
/// asymmetry at the reflecting ends.
double temperature_log_accept(int from, int to, double log_posterior,
                              const TemperingLadder& ladder);

struct TemperatureOutcome {
  int proposed = 0;
  bool accepted = false;
};

TemperatureOutcome temperature_update(ChainState& state, const QuadraticCache& cache, Rng& rng,
                                      const GepPair& gep, const PriorConfig& prior,
                                      const TemperingLadder& ladder);

/// Initial law: level 0, delta_j ~ Ber(1/2) redrawn while empty, theta ~ N(0, I).
ChainState initial_state(Index p, Rng& rng);

struct IterationStats {
  int level = 0;              ///< level at which the MALA step ran
  double mala_accept = 0.0;   ///< MALA acceptance probability
  bool temperature_accepted = false;
};

struct ChainTrace {
  std::vector<ChainState> states;      ///< states[t] for t = 0..N
  std::vector<IterationStats> stats;   ///< stats[t] for the move t -> t + 1
  std::uint64_t seed = 0;

  Index iterations() const { return static_cast<Index>(stats.size()); }
};

/// One simulated-tempering chain with its cache and random stream.
class Chain {
 public:
  Chain(const GepPair& gep, const PriorConfig& prior, ChainState init, Rng rng,
        SamplerOptions options = {});

  /// One iteration of steps 1-3 under the given ladder.
  IterationStats step(const TemperingLadder& ladder);

  const ChainState& state() const { return state_; }
  const QuadraticCache& cache() const { return cache_; }
  Rng& rng() { return rng_; }

 private:
  const GepPair* gep_;
  PriorConfig prior_;
  ChainState state_;
  QuadraticCache cache_;
  Rng rng_;
  SamplerOptions options_;
};

/// N iterations of the fixed-parameter sampler from the initial law.
/// Deterministic in seed.
ChainTrace run_chain(const GepPair& gep, const PriorConfig& prior, const TemperingLadder& ladder,
                     Index iterations, Index batch_size, std::uint64_t seed,
                     int mala_steps = 1);

}  // namespace bscca
