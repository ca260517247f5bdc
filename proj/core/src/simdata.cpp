#include "bscca/simdata.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "bscca/error.hpp"
#include "bscca/rng.hpp"

namespace bscca {

GepPair PopulationModel::gep(double sample_size) const {
  return assemble_gep(sigma.topLeftCorner(px, px), sigma.bottomRightCorner(py, py),
                      sigma.topRightCorner(px, py), sample_size, false);
}

Vector PopulationModel::theta_star() const {
  Vector theta(p());
  theta << vx_star, vy_star;
  return theta;
}

PopulationModel build_population_cov(Index p, double lambda1, double rho) {
  if (p < 10 || p % 10 != 0) {
    throw Error(ErrorKind::kInvalidConfig,
                "population model needs p divisible by 10, got " + std::to_string(p));
  }
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "lambda1 must lie in (0, 1)");
  }
  const Index half = p / 2;
  const Index block = p / 10;

  Matrix s_view = Matrix::Zero(half, half);
  for (Index b = 0; b < 5; ++b) {
    for (Index i = 0; i < block; ++i) {
      for (Index j = 0; j < block; ++j) {
        s_view(b * block + i, b * block + j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
      }
    }
  }

  Vector v = Vector::Zero(half);
  Index count = 0;
  for (Index j : {0, 5, 10}) {
    if (j < half) ++count;
  }
  for (Index j : {0, 5, 10}) {
    if (j < half) v[j] = 1.0 / std::sqrt(static_cast<double>(count));
  }

  PopulationModel model;
  model.px = half;
  model.py = half;
  model.lambda1 = lambda1;
  model.vx_star = v;
  model.vy_star = v;
  const Vector sx_v = s_view * v;
  const double norm = std::sqrt(v.dot(sx_v)) * std::sqrt(v.dot(sx_v));
  const Matrix sxy = lambda1 * sx_v * sx_v.transpose() / norm;

  model.sigma.resize(p, p);
  model.sigma << s_view, sxy, sxy.transpose(), s_view;

  Eigen::LLT<Matrix> llt(model.sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNotPositiveDefinite, "population covariance is not positive definite");
  }
  return model;
}

Dataset sample_gaussian_pairs(const PopulationModel& model, Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::kInvalidConfig, "sample size must be positive");
  Eigen::LLT<Matrix> llt(model.sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNotPositiveDefinite, "covariance factorization failed");
  }
  const Matrix lower = llt.matrixL();
  const Index p = model.p();
  Rng rng(seed);
  Matrix z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  const Matrix draws = z * lower.transpose();
  Dataset data;
  data.x = draws.leftCols(model.px);
  data.y = draws.rightCols(model.py);
  return data;
}

TruncationSpec TruncationSpec::uniform(Index py, double c) {
  TruncationSpec spec;
  spec.threshold = Vector::Constant(py, c);
  return spec;
}

Dataset truncate_copula(const Dataset& latent, const TruncationSpec& spec) {
  if (spec.threshold.size() != latent.py()) {
    throw Error(ErrorKind::kDimensionMismatch, "one truncation threshold per view-2 column");
  }
  Dataset out = latent;
  if (spec.transform) {
    for (Index j = 0; j < out.px(); ++j) {
      for (Index i = 0; i < out.n(); ++i) out.x(i, j) = spec.transform(j, out.x(i, j));
    }
  }
  for (Index j = 0; j < out.py(); ++j) {
    for (Index i = 0; i < out.n(); ++i) {
      if (!(out.y(i, j) > spec.threshold[j])) out.y(i, j) = 0.0;
    }
  }
  return out;
}

Vector zero_fraction(const Matrix& m) {
  Vector out(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    out[j] = static_cast<double>((m.col(j).array() == 0.0).count()) / static_cast<double>(m.rows());
  }
  return out;
}

}  // namespace bscca
