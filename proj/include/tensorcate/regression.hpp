#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tensorcate {

/// Ridge values tried in order when the normal equations are singular.
inline const std::vector<double> kRidgeLadder{0.0, 1e-8, 1e-6};

struct StackedSolution {
  Eigen::MatrixXd coef;  // K x P, row u is the block for component u
  double ridge = 0.0;    // ridge actually used
  bool escalated = false;
};

/// Weighted stacked least squares. With Phi_i = (w_i1 x_i, ..., w_iK x_i)
/// solves (1/n)(sum_i Phi_i Phi_i^T + ridge n I) b = (1/n) sum_i Phi_i y_i.
/// `ridge` is the first rung; larger rungs of kRidgeLadder are tried when
/// the system is singular. Throws SingularSystem when all rungs fail.
StackedSolution solve_stacked(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, const Eigen::VectorXd& y,
                              double ridge = 0.0);

/// Reciprocal condition estimate below which a system counts as singular.
inline constexpr double kSingularRcond = 1e-13;

}  // namespace tensorcate
