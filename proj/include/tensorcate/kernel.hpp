#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace tensorcate {

enum class BandwidthRule { fixed, median_heuristic, power_rule };

std::string to_string(BandwidthRule rule);
BandwidthRule bandwidth_rule_from_string(const std::string& name);

/// Gaussian RBF kernel k(x, y) = exp(-||x - y||^2 / (2 s^2)).
struct KernelSpec {
  BandwidthRule rule = BandwidthRule::median_heuristic;
  double bandwidth = 0.0;  // used as-is for `fixed`; filled in by resolve()
  double power_c = 1.0;    // s = c * n^(-1/(2b + 7d)) for `power_rule`
  double power_b = 2.0;
  int landmark_count = 1000;
  double jitter = 1e-10;

  bool resolved() const { return bandwidth > 0.0; }
};

/// Returns a copy of `spec` with a positive bandwidth. `points` are the pooled
/// rows the rule is applied to; `n` is the sample size fed to the power rule.
KernelSpec resolve_bandwidth(const KernelSpec& spec, const Eigen::MatrixXd& points, Eigen::Index n,
                             std::uint64_t seed);

/// Median pairwise Euclidean distance over at most `max_points` rows,
/// subsampled uniformly with `seed`.
double median_pairwise_distance(const Eigen::MatrixXd& points, Eigen::Index max_points, std::uint64_t seed);

double rbf(const double* x, const double* y, Eigen::Index dim, double bandwidth);

/// Entry (i, j) = k(x_i, y_j). Rows are points.
Eigen::MatrixXd gram(double bandwidth, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct CholeskyFactor {
  Eigen::MatrixXd lower;  // L with L L^T = G + jitter I
  double jitter = 0.0;
};

/// Cholesky factor of a PSD matrix. On failure the jitter is multiplied by
/// 10 (starting from 1e-12 when `jitter` is zero) until it exceeds 1e-4, at
/// which point NotPSD is thrown.
CholeskyFactor chol_psd(const Eigen::MatrixXd& g, double jitter);

/// Finite-dimensional coordinates for the span of the anchor feature maps:
/// x(z) = L^{-1} k(A, z), so that <x(z), x(z')> is the projected kernel.
/// A vector m in these coordinates represents the RKHS element
/// sum_j c_j rho(a_j) with c = L^{-T} m.
class AnchorBasis {
 public:
  AnchorBasis() = default;
  AnchorBasis(Eigen::MatrixXd anchors, double bandwidth, double jitter);

  const Eigen::MatrixXd& anchors() const { return anchors_; }
  double bandwidth() const { return bandwidth_; }
  double jitter_used() const { return factor_.jitter; }
  Eigen::Index dim() const { return anchors_.rows(); }

  /// One row of coordinates per row of `points`.
  Eigen::MatrixXd features(const Eigen::MatrixXd& points) const;

  /// Anchor expansion coefficients for coordinate vectors (columns).
  Eigen::MatrixXd coefficients(const Eigen::MatrixXd& coords) const;

 private:
  Eigen::MatrixXd anchors_;
  double bandwidth_ = 0.0;
  CholeskyFactor factor_;
};

/// Uniform subsample of `count` distinct row indices out of `n`, sorted.
std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index count, std::uint64_t seed);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows);

}  // namespace tensorcate
