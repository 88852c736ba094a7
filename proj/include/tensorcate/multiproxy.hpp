#pragma once

// Treatment model, posterior update, outcome model and effect estimates
// for a scalar treatment confounded by a latent class seen through three
// proxy views.

#include "tensorcate/dataset.hpp"
#include "tensorcate/features.hpp"
#include "tensorcate/mixture.hpp"

#include <Eigen/Dense>

#include <vector>

namespace tensorcate {

enum class TreatmentFamily { gaussian };

inline constexpr double kSigmaFloor = 1e-6;
/// Minimum total posterior mass per component for effect estimates.
inline constexpr double kMinClusterMass = 1e-8;

struct RegressionDiagnostics {
  double ridge = 0.0;
  bool escalated = false;
};

struct TreatmentModel {
  Eigen::MatrixXd alpha;   // K x L
  Eigen::VectorXd sigma2;  // K
  TreatmentFamily family = TreatmentFamily::gaussian;
  FeatureMap features;
  RegressionDiagnostics mean_fit;
  RegressionDiagnostics variance_fit;
  int clamped_variances = 0;
};

struct OutcomeModel {
  Eigen::MatrixXd beta;  // K x M
  FeatureMap features;
  RegressionDiagnostics fit;
};

/// Everything needed to evaluate tau(a) without the training data:
/// tau(a) = sum_u pi_u sum_m beta(u,m) a^power_m expectation(u,m), where
/// expectation(u,m) is the posterior-weighted training mean of the z-part
/// of feature m within component u.
struct CausalEstimate {
  Eigen::VectorXd priors;
  OutcomeModel outcome;
  Eigen::MatrixXd feature_expectations;  // K x M
};

struct TreatmentMeanFit {
  Eigen::MatrixXd alpha;
  RegressionDiagnostics diagnostics;
};

TreatmentMeanFit fit_treatment_mean(const MultiProxyData& data, const PosteriorMatrix& w, const FeatureMap& phi,
                                    double ridge = 0.0);

struct TreatmentVarianceFit {
  Eigen::VectorXd sigma2;
  RegressionDiagnostics diagnostics;
  int clamped = 0;
};

/// Regresses r_i^2 - C_i on the posterior weights, where r_i is the residual
/// of the posterior-averaged mean and C_i the posterior variance of the
/// component means.
TreatmentVarianceFit fit_treatment_variance(const MultiProxyData& data, const PosteriorMatrix& w,
                                            const Eigen::MatrixXd& alpha, const FeatureMap& phi);

double normal_density(double x, double mean, double variance);

/// e_u(a, z) given phi(z) already evaluated.
double treatment_density(const TreatmentModel& tm, int u, double a, const Eigen::VectorXd& phi);

/// n x K matrix of e_u(a_i, z_i).
Eigen::MatrixXd treatment_density_matrix(const TreatmentModel& tm, const MultiProxyData& data);

/// w~ proportional to e * w, row by row. Rows whose products all vanish keep
/// w and are counted in fallback_rows.
PosteriorMatrix update_posteriors(const PosteriorMatrix& w, const TreatmentModel& tm, const MultiProxyData& data);

OutcomeModel fit_outcome(const MultiProxyData& data, const PosteriorMatrix& w_tilde, const FeatureMap& psi,
                         double ridge = 0.0);

/// beta_u . psi(a, z); z holds one row per view.
double estimate_cate(const OutcomeModel& om, int u, double a, const std::array<Eigen::RowVectorXd, 3>& z);

/// Stores the component feature expectations of the outcome features under
/// proxy posteriors w. Throws DegenerateCluster if a component has no mass.
CausalEstimate make_causal_estimate(const Eigen::VectorXd& priors, const OutcomeModel& om,
                                    const MultiProxyData& data, const PosteriorMatrix& w);

double estimate_ate(const CausalEstimate& ce, double a);

/// Per-component terms pi_u beta_u . E[psi(a, Z) | U=u]; they sum to tau(a).
Eigen::VectorXd ate_components(const CausalEstimate& ce, double a);

double estimate_ate(const Eigen::VectorXd& priors, const OutcomeModel& om, double a, const MultiProxyData& data,
                    const PosteriorMatrix& w);

struct MultiProxyOptions {
  int k = 3;
  MixtureOptions mixture;
  bool symmetric_views = false;
  FeatureMap treatment_features;  // empty: z1 coordinates
  FeatureMap outcome_features;    // empty: [1, a, z1 coordinates]
  double ridge = 0.0;
};

struct MultiProxyFit {
  MixtureEstimate mixture;
  TreatmentModel treatment;
  OutcomeModel outcome;
  CausalEstimate causal;
  int proxy_fallback_rows = 0;
  int treatment_fallback_rows = 0;
};

/// Stages two and three given a fitted mixture.
MultiProxyFit fit_causal_stages(const MultiProxyData& data, const MixtureEstimate& mixture,
                                const MultiProxyOptions& opts);

/// Mixture learning followed by the causal stages.
MultiProxyFit fit_multiproxy(const MultiProxyData& data, const MultiProxyOptions& opts);

/// Fills empty feature maps with the defaults for dimension d.
MultiProxyOptions with_default_features(MultiProxyOptions opts, int d);

}  // namespace tensorcate
