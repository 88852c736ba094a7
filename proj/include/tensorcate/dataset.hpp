#pragma once

#include <Eigen/Dense>

#include <array>

namespace tensorcate {

/// Three d-dimensional proxy views, a scalar treatment and an outcome.
struct MultiProxyData {
  std::array<Eigen::MatrixXd, 3> z;  // each n x d
  Eigen::VectorXd a;
  Eigen::VectorXd y;

  Eigen::Index size() const { return a.size(); }
  Eigen::Index dim() const { return z[0].cols(); }

  /// Throws DimensionMismatch unless every field has n rows and the views
  /// share one dimension.
  void validate() const;
};

/// Three categorical treatments with levels 0..levels-1 and an outcome.
struct MultiTreatmentData {
  std::array<Eigen::VectorXi, 3> a;
  Eigen::VectorXd y;
  int levels = 0;

  Eigen::Index size() const { return y.size(); }
  void validate() const;
};

}  // namespace tensorcate
