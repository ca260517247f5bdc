#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bscca/covariance.hpp"

namespace bscca {

/// Gaussian population with a planted principal canonical pair.
struct PopulationModel {
  Matrix sigma;     ///< joint covariance, p x p
  Vector vx_star;   ///< unit-norm true x direction
  Vector vy_star;   ///< unit-norm true y direction
  double lambda1 = 0.9;
  Index px = 0;
  Index py = 0;

  Index p() const { return px + py; }
  /// Population (A, B) with the given sample size attached.
  GepPair gep(double sample_size = 1.0) const;
  Vector theta_star() const;
};

/// Block Toeplitz 0.8^|j - j'| covariance (five blocks of p/10 per view)
/// with Sxy = lambda1 Sx vx vy^T Sy / sqrt(vx^T Sx vx  vy^T Sy vy), and
/// planted support {1, 6, 11} (one-based) in both views. p must be a
/// multiple of 10; support indices beyond p/2 are dropped and the remaining
/// entries share unit norm.
PopulationModel build_population_cov(Index p, double lambda1 = 0.9, double rho = 0.8);

/// n i.i.d. rows from N(0, Sigma) through the Cholesky factor of Sigma.
Dataset sample_gaussian_pairs(const PopulationModel& model, Index n, std::uint64_t seed);

/// Truncated Gaussian copula observation model. transform maps a latent
/// view-1 value (coordinate, value) to the observed scale; identity when
/// empty. View-2 coordinate j is kept when above threshold[j], else zero.
struct TruncationSpec {
  Vector threshold;
  std::function<double(Index, double)> transform;

  /// Same threshold c on all p_y coordinates.
  static TruncationSpec uniform(Index py, double c);
};

Dataset truncate_copula(const Dataset& latent, const TruncationSpec& spec);

/// Fraction of exact zeros in each column.
Vector zero_fraction(const Matrix& m);

}  // namespace bscca
