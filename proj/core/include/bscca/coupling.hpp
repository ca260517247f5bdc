#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bscca/adapt.hpp"
#include "bscca/sampler.hpp"

namespace bscca {

/// Per-chain results of one coupled theta update.
struct CoupledMalaOutcome {
  MalaOutcome x;
  MalaOutcome y;
  bool proposals_coalesced = false;
};

/// Both chains update the same coordinates; for each j one common uniform
/// u_j sets delta_j = 1{u_j < q_j} in each chain against its own q_j.
void coupled_gibbs_step(ChainState& x, QuadraticCache& cx, ChainState& y, QuadraticCache& cy,
                        const GibbsPlan& plan, Rng& rng, const GepPair& gep,
                        const PriorConfig& prior, const TemperingLadder& ladder);

/// Coordinates are split by (delta^x_j, delta^y_j). Unselected coordinates
/// share one standard normal Z_j scaled by sqrt(t_k / rho0) per chain; a
/// coordinate selected in only one chain feeds the same Z_j into that
/// chain's MALA proposal noise. On the common selected set the proposal
/// noise is reflection-maximally coupled when both chains share the support
/// and level (proposals then coincide with positive probability), and
/// reflection coupled otherwise. A common uniform decides both acceptances.
CoupledMalaOutcome coupled_theta_step(ChainState& x, QuadraticCache& cx, ChainState& y,
                                      QuadraticCache& cy, Rng& rng, const GepPair& gep,
                                      const PriorConfig& prior, const TemperingLadder& ladder);

/// Common w picks the direction (w <= 0.5: left, reflected per chain at the
/// ends) and a common u decides acceptance against each chain's own ratio.
std::pair<TemperatureOutcome, TemperatureOutcome> coupled_temperature_step(
    ChainState& x, const QuadraticCache& cx, ChainState& y, const QuadraticCache& cy, Rng& rng,
    const GepPair& gep, const PriorConfig& prior, const TemperingLadder& ladder);

/// Two chains advanced by the coupled kernel. Holds its caches and stream.
class CoupledChains {
 public:
  CoupledChains(const GepPair& gep, const PriorConfig& prior, ChainState x, ChainState y,
                Rng rng, Index batch_size);

  /// One coupled iteration. Returns chain x's stats (used for adaptation).
  IterationStats step(const TemperingLadder& ladder);

  const ChainState& x() const { return x_; }
  const ChainState& y() const { return y_; }
  bool met() const { return x_.identical(y_); }

 private:
  const GepPair* gep_;
  PriorConfig prior_;
  ChainState x_;
  ChainState y_;
  QuadraticCache cx_;
  QuadraticCache cy_;
  Rng rng_;
  Index batch_size_;
};

struct CouplingOptions {
  bool adaptive = true;     ///< shared adaptation driven by chain x
  double tolerance = 0.2;   ///< Wang-Landau flatness tolerance
  Index after_meeting = 0;  ///< extra coupled steps run after meeting
};

/// Outcome of one lagged coupling run.
struct MeetingResult {
  std::optional<Index> tau;        ///< meeting time tau^(L), absent if not met
  Index lag = 0;
  Index coupled_steps = 0;
  bool stayed_met = true;          ///< identical through options.after_meeting steps
};

/// Default cap 10 p + 1000 on the meeting time.
Index default_max_iterations(Index p);

/// X runs L solo steps, then (X_{L+t}, Y_t) follow the coupled kernel until
/// they coincide bitwise or L + t reaches max_iterations. The ladder supplies
/// the temperatures and the initial step sizes and weights.
MeetingResult lagged_meeting_time(const GepPair& gep, const PriorConfig& prior,
                                  const TemperingLadder& ladder, Index max_iterations,
                                  Index batch_size, Index lag, std::uint64_t seed,
                                  const CouplingOptions& options = {});

/// Monte Carlo estimate of the TV upper bound on a grid of t.
struct TvCurve {
  std::vector<Index> t_grid;
  std::vector<double> bound;
  Index replications = 0;
};

/// bound(t) = mean over replications of max(0, ceil((tau - L - t) / L)).
/// An empty t_grid means 0..max(tau).
TvCurve tv_bound_curve(const std::vector<Index>& meeting_times, Index lag,
                       std::vector<Index> t_grid = {});

/// First t on the grid with bound(t) < epsilon.
std::optional<Index> mixing_time(const TvCurve& curve, double epsilon = 0.1);

}  // namespace bscca
