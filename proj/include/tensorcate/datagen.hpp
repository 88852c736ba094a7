#pragma once

// Seeded simulation designs with ground truth, and brute-force oracles
// computed from the true parameters.

#include "tensorcate/dataset.hpp"
#include "tensorcate/mixture.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace tensorcate {

/// Z_v | U=u ~ N(means[v].row(u), proxy_sigma^2 I)
/// A | Z, U=u ~ N(alpha.row(u) . z1, sigma2(u))
/// Y | A, Z, U=u ~ N(beta.row(u) . [1, a, z1], outcome_sigma^2)
struct MultiProxyScenario {
  Eigen::VectorXd priors;
  std::array<Eigen::MatrixXd, 3> means;  // K x d per view
  double proxy_sigma = 0.8;
  Eigen::MatrixXd alpha;  // K x d
  Eigen::VectorXd sigma2;
  Eigen::MatrixXd beta;  // K x (d + 2)
  double outcome_sigma = 1.0;

  int k() const { return static_cast<int>(priors.size()); }
  int d() const { return static_cast<int>(means[0].cols()); }
  void validate() const;

  /// Three clusters in three dimensions with view-specific centers.
  static MultiProxyScenario paper_default();
};

/// A_v | U=u ~ Categorical(emissions[v].col(u)),
/// Y | A, U=u ~ N(gamma.row(u) . [1, a1, a2, a3], noise_sigma^2)
struct MultiTreatmentScenario {
  Eigen::VectorXd priors;
  std::array<Eigen::MatrixXd, 3> emissions;  // S x K, column-stochastic
  Eigen::MatrixXd gamma;                      // K x 4
  double noise_sigma = 1.0;

  int k() const { return static_cast<int>(priors.size()); }
  int levels() const { return static_cast<int>(emissions[0].rows()); }
  void validate() const;

  /// Two components, five levels per treatment.
  static MultiTreatmentScenario paper_default();
};

struct MultiProxySample {
  MultiProxyData data;
  Eigen::VectorXi labels;
};

struct MultiTreatmentSample {
  MultiTreatmentData data;
  Eigen::VectorXi labels;
};

MultiProxySample simulate_multiproxy(const MultiProxyScenario& s, Eigen::Index n, std::uint64_t seed);
MultiTreatmentSample simulate_multitreatment(const MultiTreatmentScenario& s, Eigen::Index n, std::uint64_t seed);

/// Exact Bayes posteriors under the true parameters, computed in the log
/// domain. treatment_updated also conditions on the treatment.
PosteriorMatrix oracle_posteriors(const MultiProxyScenario& s, const MultiProxyData& data, PosteriorFlavor flavor);

/// True per-view likelihood matrices (n x K), unfloored.
std::array<Eigen::MatrixXd, 3> oracle_likelihoods(const MultiProxyScenario& s, const MultiProxyData& data);

struct MonteCarloValue {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo estimate of sum_u pi_u E[beta_u . psi(a, Z) | U=u] from
/// `draws` fresh samples of (U, Z1).
MonteCarloValue oracle_ate(const MultiProxyScenario& s, double a, Eigen::Index draws, std::uint64_t seed);

/// Ordinary least squares of y on x within each label group (K x p),
/// solved by column-pivoted QR.
Eigen::MatrixXd oracle_group_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXi& labels,
                                 int k);

}  // namespace tensorcate
