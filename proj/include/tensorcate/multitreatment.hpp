#pragma once

// Effects of three categorical treatments that are themselves conditionally
// independent given the latent class; no proxies are needed.

#include "tensorcate/dataset.hpp"
#include "tensorcate/features.hpp"
#include "tensorcate/mixture.hpp"
#include "tensorcate/multiproxy.hpp"

#include <Eigen/Dense>

#include <array>

namespace tensorcate {

struct MultiTreatmentModel {
  MixtureEstimate mixture;  // discrete backend: priors and emissions
  Eigen::MatrixXd gamma;    // K x M
  FeatureMap xi;
  RegressionDiagnostics fit;
  int fallback_rows = 0;

  const Eigen::VectorXd& priors() const { return mixture.priors; }
};

struct MultiTreatmentOptions {
  int k = 2;
  MixtureOptions mixture;
  FeatureMap xi;  // empty: [1, a1, a2, a3]
  double ridge = 0.0;
};

MultiTreatmentModel fit_multitreatment(const MultiTreatmentData& data, const MultiTreatmentOptions& opts);

/// Outcome regression given an already fitted discrete mixture.
MultiTreatmentModel fit_multitreatment_outcome(const MultiTreatmentData& data, const MixtureEstimate& mixture,
                                               const FeatureMap& xi, double ridge = 0.0);

double mt_cate(const MultiTreatmentModel& m, int u, const std::array<double, 3>& a);
double mt_ate(const MultiTreatmentModel& m, const std::array<double, 3>& a);

}  // namespace tensorcate
