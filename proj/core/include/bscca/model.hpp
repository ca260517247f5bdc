#pragma once

#include <cstdint>
#include <vector>

#include "bscca/covariance.hpp"

namespace bscca {

/// Spike-and-slab prior and quasi-likelihood scale.
struct PriorConfig {
  double rho0 = 10.0;  ///< spike precision
  double rho1 = 0.5;   ///< slab precision
  double q = 0.0;      ///< prior inclusion probability
  double sigma = 1.0;

  /// Prior log odds log(q / (1 - q)).
  double a() const;
  void validate() const;

  /// rho0 = 10, rho1 = 0.5, q = p^-1.5, sigma = 1.
  static PriorConfig defaults_for(Index p);
};

/// Temperatures t_1 = 1 < ... < t_K with log weights log c_k and MALA step
/// sizes eta_k. Levels are zero-based in code.
struct TemperingLadder {
  std::vector<double> temperatures;
  std::vector<double> log_weights;
  std::vector<double> step_sizes;

  int size() const { return static_cast<int>(temperatures.size()); }
  void validate() const;

  /// Zero log weights and the given step sizes.
  static TemperingLadder make(std::vector<double> temperatures, std::vector<double> step_sizes);
  /// Zero log weights and eta_k = scale * t_k / p.
  static TemperingLadder with_scaled_steps(std::vector<double> temperatures, Index p,
                                           double scale = 0.5);
  /// {1, 1/0.9, 1/0.8, 1/0.7, 1/0.6}.
  static std::vector<double> default_temperatures();
};

using Support = std::vector<std::uint8_t>;

/// One point (delta, theta, k) of the extended space. level is k - 1.
struct ChainState {
  Support delta;
  Vector theta;
  int level = 0;

  Index p() const { return theta.size(); }
  Index active_count() const;
  /// theta with unselected coordinates zeroed.
  Vector masked() const;
  std::vector<Index> selected() const;

  /// Bitwise equality of delta, theta and level.
  bool identical(const ChainState& other) const;
};

/// Quadratic forms of v = theta o delta against A and B, plus A v and B v so a
/// single-coordinate toggle is evaluated in O(1) and committed in O(p).
class QuadraticCache {
 public:
  static constexpr int kRefreshInterval = 500;

  QuadraticCache() = default;
  QuadraticCache(const GepPair& gep, const ChainState& state);

  void rebuild(const GepPair& gep, const ChainState& state);

  double qa() const { return qa_; }
  double qb() const { return qb_; }
  const Vector& a_dot() const { return a_dot_; }
  const Vector& b_dot() const { return b_dot_; }
  Index active_count() const { return active_; }
  int flips_since_rebuild() const { return flips_; }

  /// (qa, qb) after switching coordinate j on (add) or off (remove) with the
  /// coordinate value theta_j; does not modify the cache.
  std::pair<double, double> toggled(const GepPair& gep, Index j, double theta_j, bool add) const;

  /// Commit a toggle; the caller flips delta_j. Rebuilds from scratch every
  /// kRefreshInterval commits, which is why it needs the post-flip state.
  void commit(const GepPair& gep, Index j, double theta_j, bool add, const ChainState& after);

 private:
  double qa_ = 0.0;
  double qb_ = 0.0;
  Vector a_dot_;
  Vector b_dot_;
  Index active_ = 0;
  int flips_ = 0;
};

/// theta^T A theta / theta^T B theta; throws kUndefinedQuotient when the
/// denominator is not positive.
double rayleigh(const VectorRef& theta, const GepPair& gep);

/// Quotient at theta o delta; -infinity for the empty model.
double rayleigh_selected(const ChainState& state, const GepPair& gep);

/// Quotient from cached forms; -infinity when nothing is selected.
double rayleigh_from_forms(double qa, double qb, Index active);

/// Log quasi-posterior at temperature 1, up to a constant:
/// a|delta| - rho1/2 |theta_delta|^2 - rho0/2 |theta - theta_delta|^2
///   + (2n / sigma^2) R(theta_delta).
double log_quasi_posterior(const ChainState& state, const GepPair& gep, const PriorConfig& prior);
double log_quasi_posterior(const ChainState& state, const QuadraticCache& cache,
                           const GepPair& gep, const PriorConfig& prior);

/// -log c_k + log_quasi_posterior / t_k at the state's level.
double log_tempered(const ChainState& state, const GepPair& gep, const PriorConfig& prior,
                    const TemperingLadder& ladder);

/// Tempered log density of the selected block u (length |delta|) at level,
/// and its gradient. Both omit additive constants.
double log_selected_density(const VectorRef& u, int level, const Support& delta,
                            const GepPair& gep, const PriorConfig& prior,
                            const TemperingLadder& ladder);
Vector grad_selected(const VectorRef& u, int level, const Support& delta, const GepPair& gep,
                     const PriorConfig& prior, const TemperingLadder& ladder);

/// Density of the selected block restricted to a fixed index set. Holds the
/// sub-blocks of A and B so repeated evaluations cost O(m^2).
class SelectedBlock {
 public:
  SelectedBlock(const GepPair& gep, const std::vector<Index>& indices, double temperature,
                const PriorConfig& prior);

  Index size() const { return static_cast<Index>(indices_.size()); }
  const std::vector<Index>& indices() const { return indices_; }

  /// Log density; -infinity where the quotient is undefined.
  double log_density(const VectorRef& u) const;
  /// Log density and gradient in one pass. Returns false where the quotient
  /// is undefined (grad untouched).
  bool evaluate(const VectorRef& u, double& log_density, Vector& grad) const;

 private:
  std::vector<Index> indices_;
  Matrix a_;
  Matrix b_;
  double slab_scale_;   // rho1 / t
  double quasi_scale_;  // 2n / (sigma^2 t)
};

}  // namespace bscca
