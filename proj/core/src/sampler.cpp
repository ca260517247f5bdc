#include "bscca/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bscca/error.hpp"

namespace bscca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quotient for a branch of the Gibbs update; -infinity when the branch is
// the empty model or its denominator vanished numerically.
double branch_quotient(double qa, double qb, Index active) {
  if (active == 0 || !(qb > 0.0)) return -kInf;
  return qa / qb;
}

}  // namespace

Index default_batch_size(Index p) { return std::min<Index>(100, p); }

GibbsPlan draw_gibbs_plan(Index p, Index batch_size, Rng& rng) {
  if (batch_size < 0 || batch_size > p) {
    throw Error(ErrorKind::kInvalidConfig, "Gibbs batch size must lie in 0..p");
  }
  std::vector<Index> pool(static_cast<std::size_t>(p));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < batch_size; ++i) {
    const auto r = static_cast<Index>(rng.index(static_cast<std::size_t>(p - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(i + r)]);
  }
  pool.resize(static_cast<std::size_t>(batch_size));
  return GibbsPlan{std::move(pool)};
}

double logistic(double log_odds) {
  if (log_odds == kInf) return 1.0;
  if (log_odds == -kInf) return 0.0;
  if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

double gibbs_log_odds(Index j, const ChainState& state, const QuadraticCache& cache,
                      const GepPair& gep, const PriorConfig& prior,
                      const TemperingLadder& ladder) {
  if (j < 0 || j >= state.p()) {
    throw Error(ErrorKind::kInvalidIndex, "coordinate " + std::to_string(j) + " out of range");
  }
  const double t = ladder.temperatures.at(static_cast<std::size_t>(state.level));
  const double theta_j = state.theta[j];
  const bool on = state.delta[static_cast<std::size_t>(j)] != 0;
  const Index m = cache.active_count();

  double r_on = 0.0;
  double r_off = 0.0;
  const auto [qa_t, qb_t] = cache.toggled(gep, j, theta_j, !on);
  if (on) {
    r_on = branch_quotient(cache.qa(), cache.qb(), m);
    r_off = branch_quotient(qa_t, qb_t, m - 1);
  } else {
    r_off = branch_quotient(cache.qa(), cache.qb(), m);
    r_on = branch_quotient(qa_t, qb_t, m + 1);
  }
  if (r_on == -kInf && r_off == -kInf) {
    throw Error(ErrorKind::kUndefinedQuotient,
                "Rayleigh quotient undefined for both values of delta_" + std::to_string(j));
  }
  if (r_off == -kInf) return kInf;
  if (r_on == -kInf) return -kInf;
  const double scale = 2.0 * gep.sample_size / (prior.sigma * prior.sigma * t);
  return prior.a() / t + (prior.rho0 - prior.rho1) * theta_j * theta_j / (2.0 * t) +
         scale * (r_on - r_off);
}

double gibbs_success_prob(Index j, const ChainState& state, const QuadraticCache& cache,
                          const GepPair& gep, const PriorConfig& prior,
                          const TemperingLadder& ladder) {
  return logistic(gibbs_log_odds(j, state, cache, gep, prior, ladder));
}

double gibbs_success_prob(Index j, const ChainState& state, const GepPair& gep,
                          const PriorConfig& prior, const TemperingLadder& ladder) {
  const QuadraticCache cache(gep, state);
  return gibbs_success_prob(j, state, cache, gep, prior, ladder);
}

void gibbs_update_delta(ChainState& state, QuadraticCache& cache, const GibbsPlan& plan,
                        Rng& rng, const GepPair& gep, const PriorConfig& prior,
                        const TemperingLadder& ladder) {
  for (Index j : plan.indices) {
    const double q = gibbs_success_prob(j, state, cache, gep, prior, ladder);
    const bool draw = rng.uniform() < q;
    auto& bit = state.delta[static_cast<std::size_t>(j)];
    if (draw != (bit != 0)) {
      bit = draw ? 1 : 0;
      cache.commit(gep, j, state.theta[j], draw, state);
    }
  }
}

MalaPoint mala_point(const SelectedBlock& block, Vector u) {
  MalaPoint point;
  point.u = std::move(u);
  point.valid = block.evaluate(point.u, point.log_density, point.grad);
  return point;
}

Vector mala_mean(const MalaPoint& point, double eta) { return point.u + eta * point.grad; }

double mala_log_accept(const MalaPoint& current, const MalaPoint& proposal, double eta) {
  if (!proposal.valid) return -kInf;
  const double forward = (proposal.u - mala_mean(current, eta)).squaredNorm();
  const double backward = (current.u - mala_mean(proposal, eta)).squaredNorm();
  return proposal.log_density - current.log_density + (forward - backward) / (4.0 * eta);
}

MalaOutcome mala_update_theta(ChainState& state, QuadraticCache& cache, Rng& rng,
                              const GepPair& gep, const PriorConfig& prior,
                              const TemperingLadder& ladder, int mala_steps) {
  const auto k = static_cast<std::size_t>(state.level);
  const double t = ladder.temperatures.at(k);
  const double eta = ladder.step_sizes.at(k);
  const double spike_sd = std::sqrt(t / prior.rho0);

  std::vector<Index> selected;
  for (Index j = 0; j < state.p(); ++j) {
    if (state.delta[static_cast<std::size_t>(j)]) {
      selected.push_back(j);
    } else {
      state.theta[j] = spike_sd * rng.normal();
    }
  }

  MalaOutcome outcome;
  if (!selected.empty()) {
    const SelectedBlock block(gep, selected, t, prior);
    MalaPoint current = mala_point(block, state.theta(selected));
    if (!current.valid) {
      throw Error(ErrorKind::kUndefinedQuotient, "MALA started where the quotient is undefined");
    }
    const double noise_scale = std::sqrt(2.0 * eta);
    const auto m = static_cast<Index>(selected.size());
    for (int s = 0; s < mala_steps; ++s) {
      Vector z(m);
      for (Index i = 0; i < m; ++i) z[i] = rng.normal();
      MalaPoint proposal = mala_point(block, mala_mean(current, eta) + noise_scale * z);
      const double log_alpha = mala_log_accept(current, proposal, eta);
      outcome.accept_prob = log_alpha >= 0.0 ? 1.0 : std::exp(log_alpha);
      outcome.accepted = std::log(rng.uniform()) < log_alpha;
      if (outcome.accepted) current = std::move(proposal);
    }
    state.theta(selected) = current.u;
  }
  cache.rebuild(gep, state);
  return outcome;
}

int propose_level(int level, int levels, double w) {
  if (levels <= 1) return level;
  if (level == 0) return 1;
  if (level == levels - 1) return levels - 2;
  return w <= 0.5 ? level - 1 : level + 1;
}

double temperature_log_accept(int from, int to, double log_posterior,
                              const TemperingLadder& ladder) {
  const int levels = ladder.size();
  auto log_target = [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    return -ladder.log_weights[k] + log_posterior / ladder.temperatures[k];
  };
  auto log_proposal = [&](int i) {
    return (i == 0 || i == levels - 1) ? 0.0 : std::log(0.5);
  };
  return log_target(to) - log_target(from) + log_proposal(to) - log_proposal(from);
}

TemperatureOutcome temperature_update(ChainState& state, const QuadraticCache& cache, Rng& rng,
                                      const GepPair& gep, const PriorConfig& prior,
                                      const TemperingLadder& ladder) {
  TemperatureOutcome outcome;
  outcome.proposed = state.level;
  const int levels = ladder.size();
  if (levels <= 1) return outcome;
  const double w = rng.uniform();
  const double u = rng.uniform();
  outcome.proposed = propose_level(state.level, levels, w);
  const double log_post = log_quasi_posterior(state, cache, gep, prior);
  const double log_alpha = temperature_log_accept(state.level, outcome.proposed, log_post, ladder);
  if (std::log(u) < log_alpha) {
    state.level = outcome.proposed;
    outcome.accepted = true;
  }
  return outcome;
}

ChainState initial_state(Index p, Rng& rng) {
  ChainState state;
  state.delta.assign(static_cast<std::size_t>(p), 0);
  do {
    for (auto& bit : state.delta) bit = rng.bernoulli(0.5) ? 1 : 0;
  } while (std::find(state.delta.begin(), state.delta.end(), 1) == state.delta.end());
  state.theta.resize(p);
  for (Index j = 0; j < p; ++j) state.theta[j] = rng.normal();
  state.level = 0;
  return state;
}

Chain::Chain(const GepPair& gep, const PriorConfig& prior, ChainState init, Rng rng,
             SamplerOptions options)
    : gep_(&gep),
      prior_(prior),
      state_(std::move(init)),
      cache_(gep, state_),
      rng_(std::move(rng)),
      options_(options) {
  options_.batch_size = std::min(options_.batch_size, gep.p());
}

IterationStats Chain::step(const TemperingLadder& ladder) {
  IterationStats stats;
  const GibbsPlan plan = draw_gibbs_plan(gep_->p(), options_.batch_size, rng_);
  gibbs_update_delta(state_, cache_, plan, rng_, *gep_, prior_, ladder);
  stats.level = state_.level;
  stats.mala_accept =
      mala_update_theta(state_, cache_, rng_, *gep_, prior_, ladder, options_.mala_steps)
          .accept_prob;
  stats.temperature_accepted =
      temperature_update(state_, cache_, rng_, *gep_, prior_, ladder).accepted;
  return stats;
}

ChainTrace run_chain(const GepPair& gep, const PriorConfig& prior, const TemperingLadder& ladder,
                     Index iterations, Index batch_size, std::uint64_t seed, int mala_steps) {
  prior.validate();
  ladder.validate();
  if (iterations < 0) throw Error(ErrorKind::kInvalidConfig, "iterations must be >= 0");
  Rng rng(seed);
  ChainState init = initial_state(gep.p(), rng);
  Chain chain(gep, prior, std::move(init), std::move(rng),
              SamplerOptions{batch_size, mala_steps});
  ChainTrace trace;
  trace.seed = seed;
  trace.states.reserve(static_cast<std::size_t>(iterations + 1));
  trace.stats.reserve(static_cast<std::size_t>(iterations));
  trace.states.push_back(chain.state());
  for (Index t = 0; t < iterations; ++t) {
    trace.stats.push_back(chain.step(ladder));
    trace.states.push_back(chain.state());
  }
  return trace;
}

}  // namespace bscca
