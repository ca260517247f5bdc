#pragma once

#include <functional>
#include <string_view>

#include <Eigen/Dense>

namespace bscca {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Paired observations; rows are samples. X is n x p_x, Y is n x p_y.
struct Dataset {
  Matrix x;
  Matrix y;

  Index n() const { return x.rows(); }
  Index px() const { return x.cols(); }
  Index py() const { return y.cols(); }
  Index p() const { return px() + py(); }

  /// Throws when the views disagree on n or n < 2.
  void validate() const;
  Matrix joined() const;
};

/// The pair (A, B) whose generalized Rayleigh quotient defines the CCA
/// objective. A has zero diagonal blocks and off-diagonal blocks Sxy, Sxy^T;
/// B is block diagonal with Sx, Sy. sample_size is the n that scales the
/// quasi-likelihood.
struct GepPair {
  Matrix a;
  Matrix b;
  Index px = 0;
  Index py = 0;
  double sample_size = 0.0;

  Index p() const { return px + py; }
  Matrix sx() const { return b.topLeftCorner(px, px); }
  Matrix sy() const { return b.bottomRightCorner(py, py); }
  Matrix sxy() const { return a.topRightCorner(px, py); }
};

enum class Estimator { kSample, kKendallSine };

std::string_view to_string(Estimator estimator);
/// Accepts "sample" and "kendall-sine".
Estimator parse_estimator(std::string_view name);

/// Maps a Kendall tau matrix to a latent correlation matrix. The data are
/// passed along so truncation-aware bridges can inspect the margins.
using TauBridge = std::function<Matrix(const Matrix& tau, const Dataset& data)>;

inline constexpr double kDefaultPsdFloor = 1e-8;

/// (1/n) sum (z_i - zbar)(z_i - zbar)^T over the rows of data.
Matrix sample_covariance(const MatrixRef& data);

/// Pairwise Kendall tau-a; ties contribute zero and the diagonal is 1.
Matrix kendall_tau_matrix(const MatrixRef& data);

/// sin(pi * tau / 2), the bridge for continuous margins.
double sine_bridge(double tau);
Matrix sine_bridge(const Matrix& tau);

/// Clips eigenvalues of a symmetric matrix from below at floor. Matrices
/// that already satisfy the floor are returned unchanged.
Matrix psd_repair(const MatrixRef& m, double floor = kDefaultPsdFloor);

/// Lays out (A, B) from the covariance blocks. When repair_b is set each
/// diagonal block of B goes through psd_repair.
GepPair assemble_gep(const MatrixRef& sx, const MatrixRef& sy, const MatrixRef& sxy,
                     double sample_size, bool repair_b = false,
                     double floor = kDefaultPsdFloor);

/// Full estimation path: joint covariance (sample or Kendall + bridge) split
/// into blocks and assembled. The rank-based path always repairs B.
GepPair estimate_gep(const Dataset& data, Estimator estimator, const TauBridge& bridge = {},
                     double floor = kDefaultPsdFloor);

}  // namespace bscca
