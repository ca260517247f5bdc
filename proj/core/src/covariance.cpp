#include "bscca/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "bscca/error.hpp"

namespace bscca {

void Dataset::validate() const {
  if (x.rows() != y.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "X has " + std::to_string(x.rows()) + " rows but Y has " +
                    std::to_string(y.rows()));
  }
  if (x.rows() < 2) {
    throw Error(ErrorKind::kInsufficientData, "dataset needs at least two samples");
  }
  if (x.cols() < 1 || y.cols() < 1) {
    throw Error(ErrorKind::kEmptyInput, "both views need at least one column");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::kDomain, "dataset contains non-finite entries");
  }
}

Matrix Dataset::joined() const {
  Matrix z(n(), p());
  z << x, y;
  return z;
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::kSample: return "sample";
    case Estimator::kKendallSine: return "kendall-sine";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "sample") return Estimator::kSample;
  if (name == "kendall-sine") return Estimator::kKendallSine;
  throw Error(ErrorKind::kInvalidConfig, "unknown estimator '" + std::string(name) + "'");
}

Matrix sample_covariance(const MatrixRef& data) {
  if (data.rows() == 0) {
    throw Error(ErrorKind::kEmptyInput, "sample_covariance needs at least one row");
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Matrix centered = data.rowwise() - mean;
  Matrix cov = Matrix::Zero(data.cols(), data.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                 1.0 / static_cast<double>(data.rows()));
  return cov.selfadjointView<Eigen::Lower>();
}

Matrix kendall_tau_matrix(const MatrixRef& data) {
  const Index n = data.rows();
  const Index d = data.cols();
  if (n < 2) {
    throw Error(ErrorKind::kInsufficientData, "Kendall tau needs at least two samples");
  }
  // tau = sum over pairs of sign(dx) sign(dy) / C(n, 2); the pair sum is a
  // Gram matrix of sign vectors, accumulated in row blocks.
  constexpr Index kBlock = 4096;
  Matrix signs(kBlock, d);
  Matrix acc = Matrix::Zero(d, d);
  Index fill = 0;
  auto flush = [&]() {
    if (fill == 0) return;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(signs.topRows(fill).transpose());
    fill = 0;
  };
  for (Index i = 0; i < n; ++i) {
    for (Index k = i + 1; k < n; ++k) {
      for (Index j = 0; j < d; ++j) {
        const double diff = data(k, j) - data(i, j);
        signs(fill, j) = static_cast<double>((diff > 0.0) - (diff < 0.0));
      }
      if (++fill == kBlock) flush();
    }
  }
  flush();
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  Matrix tau = acc.selfadjointView<Eigen::Lower>();
  tau /= pairs;
  tau = tau.cwiseMax(-1.0).cwiseMin(1.0);
  tau.diagonal().setOnes();
  return tau;
}

double sine_bridge(double tau) {
  if (!(std::abs(tau) <= 1.0)) {
    throw Error(ErrorKind::kDomain, "sine_bridge expects |tau| <= 1");
  }
  return std::sin(std::numbers::pi * tau / 2.0);
}

Matrix sine_bridge(const Matrix& tau) {
  return tau.unaryExpr([](double t) { return sine_bridge(t); });
}

Matrix psd_repair(const MatrixRef& m, double floor) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "psd_repair expects a square matrix");
  }
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector& values = eig.eigenvalues();
  // Round-off slack so a repaired matrix passes through a second repair.
  const double slack = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() >= floor - slack) {
    return m;
  }
  const Vector clipped = values.cwiseMax(floor);
  const Matrix& vecs = eig.eigenvectors();
  Matrix out = vecs * clipped.asDiagonal() * vecs.transpose();
  return 0.5 * (out + out.transpose());
}

GepPair assemble_gep(const MatrixRef& sx, const MatrixRef& sy, const MatrixRef& sxy,
                     double sample_size, bool repair_b, double floor) {
  const Index px = sx.rows();
  const Index py = sy.rows();
  if (sx.cols() != px || sy.cols() != py || sxy.rows() != px || sxy.cols() != py) {
    throw Error(ErrorKind::kDimensionMismatch,
                "assemble_gep: expected Sx p_x*p_x, Sy p_y*p_y and Sxy p_x*p_y");
  }
  if (px < 1 || py < 1) {
    throw Error(ErrorKind::kEmptyInput, "assemble_gep: empty view");
  }
  GepPair gep;
  gep.px = px;
  gep.py = py;
  gep.sample_size = sample_size;
  const Index p = px + py;
  gep.a = Matrix::Zero(p, p);
  gep.a.topRightCorner(px, py) = sxy;
  gep.a.bottomLeftCorner(py, px) = sxy.transpose();
  gep.b = Matrix::Zero(p, p);
  if (repair_b) {
    gep.b.topLeftCorner(px, px) = psd_repair(sx, floor);
    gep.b.bottomRightCorner(py, py) = psd_repair(sy, floor);
  } else {
    gep.b.topLeftCorner(px, px) = sx;
    gep.b.bottomRightCorner(py, py) = sy;
  }
  return gep;
}

GepPair estimate_gep(const Dataset& data, Estimator estimator, const TauBridge& bridge,
                     double floor) {
  data.validate();
  const Index px = data.px();
  const Index py = data.py();
  const Matrix joint = data.joined();
  const double n = static_cast<double>(data.n());
  switch (estimator) {
    case Estimator::kSample: {
      const Matrix s = sample_covariance(joint);
      return assemble_gep(s.topLeftCorner(px, px), s.bottomRightCorner(py, py),
                          s.topRightCorner(px, py), n, false);
    }
    case Estimator::kKendallSine: {
      const Matrix tau = kendall_tau_matrix(joint);
      const Matrix s = bridge ? bridge(tau, data) : sine_bridge(tau);
      return assemble_gep(s.topLeftCorner(px, px), s.bottomRightCorner(py, py),
                          s.topRightCorner(px, py), n, true, floor);
    }
  }
  throw Error(ErrorKind::kInvalidConfig, "unknown estimator");
}

}  // namespace bscca
