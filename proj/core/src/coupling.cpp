#include "bscca/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bscca/error.hpp"

namespace bscca {

void coupled_gibbs_step(ChainState& x, QuadraticCache& cx, ChainState& y, QuadraticCache& cy,
                        const GibbsPlan& plan, Rng& rng, const GepPair& gep,
                        const PriorConfig& prior, const TemperingLadder& ladder) {
  auto apply = [&](ChainState& s, QuadraticCache& c, Index j, double u) {
    const double q = gibbs_success_prob(j, s, c, gep, prior, ladder);
    const bool draw = u < q;
    auto& bit = s.delta[static_cast<std::size_t>(j)];
    if (draw != (bit != 0)) {
      bit = draw ? 1 : 0;
      c.commit(gep, j, s.theta[j], draw, s);
    }
  };
  for (Index j : plan.indices) {
    const double u = rng.uniform();
    apply(x, cx, j, u);
    apply(y, cy, j, u);
  }
}

namespace {

// Position of each index inside a sorted selection, or -1.
std::vector<Index> positions(const std::vector<Index>& selected, Index p) {
  std::vector<Index> pos(static_cast<std::size_t>(p), -1);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    pos[static_cast<std::size_t>(selected[i])] = static_cast<Index>(i);
  }
  return pos;
}

}  // namespace

CoupledMalaOutcome coupled_theta_step(ChainState& x, QuadraticCache& cx, ChainState& y,
                                      QuadraticCache& cy, Rng& rng, const GepPair& gep,
                                      const PriorConfig& prior, const TemperingLadder& ladder) {
  const Index p = x.p();
  const auto kx = static_cast<std::size_t>(x.level);
  const auto ky = static_cast<std::size_t>(y.level);
  const double tx = ladder.temperatures.at(kx);
  const double ty = ladder.temperatures.at(ky);
  const double eta_x = ladder.step_sizes.at(kx);
  const double eta_y = ladder.step_sizes.at(ky);
  const double sdx = std::sqrt(tx / prior.rho0);
  const double sdy = std::sqrt(ty / prior.rho0);

  const std::vector<Index> sel_x = x.selected();
  const std::vector<Index> sel_y = y.selected();
  const std::vector<Index> pos_x = positions(sel_x, p);
  const std::vector<Index> pos_y = positions(sel_y, p);
  Vector noise_x(static_cast<Index>(sel_x.size()));
  Vector noise_y(static_cast<Index>(sel_y.size()));

  // Groups G00, G01, G10 share one normal per coordinate.
  std::vector<Index> common;  // G11 in coordinate order
  for (Index j = 0; j < p; ++j) {
    const bool in_x = pos_x[static_cast<std::size_t>(j)] >= 0;
    const bool in_y = pos_y[static_cast<std::size_t>(j)] >= 0;
    if (in_x && in_y) {
      common.push_back(j);
      continue;
    }
    const double z = rng.normal();
    if (in_x) {
      noise_x[pos_x[static_cast<std::size_t>(j)]] = z;
    } else {
      x.theta[j] = sdx * z;
    }
    if (in_y) {
      noise_y[pos_y[static_cast<std::size_t>(j)]] = z;
    } else {
      y.theta[j] = sdy * z;
    }
  }

  const SelectedBlock block_x(gep, sel_x, tx, prior);
  const SelectedBlock block_y(gep, sel_y, ty, prior);
  MalaPoint cur_x = mala_point(block_x, x.theta(sel_x));
  MalaPoint cur_y = mala_point(block_y, y.theta(sel_y));
  if (!cur_x.valid || !cur_y.valid) {
    throw Error(ErrorKind::kUndefinedQuotient, "MALA started where the quotient is undefined");
  }
  const Vector mean_x = mala_mean(cur_x, eta_x);
  const Vector mean_y = mala_mean(cur_y, eta_y);
  const double scale_x = std::sqrt(2.0 * eta_x);
  const double scale_y = std::sqrt(2.0 * eta_y);

  // G11: standardized mean difference drives the reflection.
  const auto m = static_cast<Index>(common.size());
  Vector xi(m);
  Vector diff(m);
  for (Index i = 0; i < m; ++i) {
    xi[i] = rng.normal();
    const auto j = static_cast<std::size_t>(common[static_cast<std::size_t>(i)]);
    diff[i] = mean_x[pos_x[j]] / scale_x - mean_y[pos_y[j]] / scale_y;
  }
  const double log_u_couple = std::log(rng.uniform());
  const bool full_match = sel_x == sel_y && x.level == y.level;
  bool coalesce = false;
  Vector eta_noise = xi;
  const double dnorm = diff.norm();
  if (full_match) {
    // Reflection-maximal coupling of N(mean_x, 2 eta I) and N(mean_y, 2 eta I).
    const double log_ratio = -0.5 * (xi + diff).squaredNorm() + 0.5 * xi.squaredNorm();
    coalesce = dnorm == 0.0 || log_u_couple <= log_ratio;
  }
  if (!coalesce && dnorm > 0.0) {
    const Vector e = diff / dnorm;
    eta_noise = xi - 2.0 * e.dot(xi) * e;
  }
  for (Index i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(common[static_cast<std::size_t>(i)]);
    noise_x[pos_x[j]] = xi[i];
    noise_y[pos_y[j]] = eta_noise[i];
  }

  MalaPoint prop_x = mala_point(block_x, mean_x + scale_x * noise_x);
  MalaPoint prop_y = coalesce ? prop_x : mala_point(block_y, mean_y + scale_y * noise_y);

  const double log_u = std::log(rng.uniform());
  const double log_ax = mala_log_accept(cur_x, prop_x, eta_x);
  const double log_ay = mala_log_accept(cur_y, prop_y, eta_y);

  CoupledMalaOutcome out;
  out.proposals_coalesced = coalesce;
  out.x.accept_prob = log_ax >= 0.0 ? 1.0 : std::exp(log_ax);
  out.y.accept_prob = log_ay >= 0.0 ? 1.0 : std::exp(log_ay);
  out.x.accepted = log_u < log_ax;
  out.y.accepted = log_u < log_ay;
  if (out.x.accepted) x.theta(sel_x) = prop_x.u;
  if (out.y.accepted) y.theta(sel_y) = prop_y.u;
  cx.rebuild(gep, x);
  cy.rebuild(gep, y);
  return out;
}

std::pair<TemperatureOutcome, TemperatureOutcome> coupled_temperature_step(
    ChainState& x, const QuadraticCache& cx, ChainState& y, const QuadraticCache& cy, Rng& rng,
    const GepPair& gep, const PriorConfig& prior, const TemperingLadder& ladder) {
  const int levels = ladder.size();
  std::pair<TemperatureOutcome, TemperatureOutcome> out;
  out.first.proposed = x.level;
  out.second.proposed = y.level;
  if (levels <= 1) return out;
  const double w = rng.uniform();
  const double log_u = std::log(rng.uniform());
  auto move = [&](ChainState& s, const QuadraticCache& c, TemperatureOutcome& o) {
    o.proposed = propose_level(s.level, levels, w);
    const double log_post = log_quasi_posterior(s, c, gep, prior);
    if (log_u < temperature_log_accept(s.level, o.proposed, log_post, ladder)) {
      s.level = o.proposed;
      o.accepted = true;
    }
  };
  move(x, cx, out.first);
  move(y, cy, out.second);
  return out;
}

CoupledChains::CoupledChains(const GepPair& gep, const PriorConfig& prior, ChainState x,
                             ChainState y, Rng rng, Index batch_size)
    : gep_(&gep),
      prior_(prior),
      x_(std::move(x)),
      y_(std::move(y)),
      cx_(gep, x_),
      cy_(gep, y_),
      rng_(std::move(rng)),
      batch_size_(std::min(batch_size, gep.p())) {}

IterationStats CoupledChains::step(const TemperingLadder& ladder) {
  const GibbsPlan plan = draw_gibbs_plan(gep_->p(), batch_size_, rng_);
  coupled_gibbs_step(x_, cx_, y_, cy_, plan, rng_, *gep_, prior_, ladder);
  IterationStats stats;
  stats.level = x_.level;
  stats.mala_accept =
      coupled_theta_step(x_, cx_, y_, cy_, rng_, *gep_, prior_, ladder).x.accept_prob;
  stats.temperature_accepted =
      coupled_temperature_step(x_, cx_, y_, cy_, rng_, *gep_, prior_, ladder).first.accepted;
  return stats;
}

Index default_max_iterations(Index p) { return 10 * p + 1000; }

MeetingResult lagged_meeting_time(const GepPair& gep, const PriorConfig& prior,
                                  const TemperingLadder& ladder, Index max_iterations,
                                  Index batch_size, Index lag, std::uint64_t seed,
                                  const CouplingOptions& options) {
  prior.validate();
  ladder.validate();
  if (lag < 1) throw Error(ErrorKind::kInvalidConfig, "lag must be at least 1");

  AdaptState adapt;
  adapt.tau.resize(ladder.step_sizes.size());
  std::transform(ladder.step_sizes.begin(), ladder.step_sizes.end(), adapt.tau.begin(),
                 [](double eta) { return std::log(eta); });
  adapt.log_c = ladder.log_weights;
  adapt.visits.assign(ladder.step_sizes.size(), 0);
  adapt.tolerance = options.tolerance;
  TemperingLadder current = ladder;
  auto adapt_after = [&](const IterationStats& stats, int level) {
    if (!options.adaptive) return;
    apply_adaptation(adapt, stats, level, true);
    current.log_weights = adapt.log_c;
    for (std::size_t k = 0; k < adapt.tau.size(); ++k) current.step_sizes[k] = std::exp(adapt.tau[k]);
  };

  const Rng master(seed);
  Rng init_x = master.split(1);
  Rng init_y = master.split(2);
  ChainState x0 = initial_state(gep.p(), init_x);
  ChainState y0 = initial_state(gep.p(), init_y);

  Chain solo(gep, prior, std::move(x0), master.split(3), SamplerOptions{batch_size, 1});
  for (Index t = 0; t < lag; ++t) {
    const IterationStats stats = solo.step(current);
    adapt_after(stats, solo.state().level);
  }

  MeetingResult result;
  result.lag = lag;
  CoupledChains pair(gep, prior, solo.state(), std::move(y0), master.split(4), batch_size);
  for (Index t = 1; lag + t <= max_iterations; ++t) {
    const IterationStats stats = pair.step(current);
    adapt_after(stats, pair.x().level);
    result.coupled_steps = t;
    if (pair.met()) {
      result.tau = lag + t;
      break;
    }
  }
  if (result.tau) {
    for (Index s = 0; s < options.after_meeting; ++s) {
      const IterationStats stats = pair.step(current);
      adapt_after(stats, pair.x().level);
      if (!pair.met()) result.stayed_met = false;
    }
  }
  return result;
}

TvCurve tv_bound_curve(const std::vector<Index>& meeting_times, Index lag,
                       std::vector<Index> t_grid) {
  if (meeting_times.empty()) {
    throw Error(ErrorKind::kEmptySample, "TV bound needs at least one meeting time");
  }
  if (lag < 1) throw Error(ErrorKind::kInvalidConfig, "lag must be at least 1");
  if (t_grid.empty()) {
    const Index top = *std::max_element(meeting_times.begin(), meeting_times.end());
    t_grid.resize(static_cast<std::size_t>(std::max<Index>(top, 0) + 1));
    std::iota(t_grid.begin(), t_grid.end(), Index{0});
  }
  TvCurve curve;
  curve.replications = static_cast<Index>(meeting_times.size());
  curve.bound.reserve(t_grid.size());
  for (Index t : t_grid) {
    double sum = 0.0;
    for (Index tau : meeting_times) {
      const Index num = tau - lag - t;
      if (num > 0) sum += static_cast<double>((num + lag - 1) / lag);
    }
    curve.bound.push_back(sum / static_cast<double>(meeting_times.size()));
  }
  curve.t_grid = std::move(t_grid);
  return curve;
}

std::optional<Index> mixing_time(const TvCurve& curve, double epsilon) {
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
    if (curve.bound[i] < epsilon) return curve.t_grid[i];
  }
  return std::nullopt;
}

}  // namespace bscca
