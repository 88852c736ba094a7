#include "tensorcate/multiproxy.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/regression.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tensorcate {

namespace {

void check_weights(const MultiProxyData& data, const PosteriorMatrix& w) {
  data.validate();
  if (data.size() == 0) throw EmptyInput("no samples");
  if (w.weights.rows() != data.size()) throw DimensionMismatch("posterior rows differ from dataset rows");
}

}  // namespace

TreatmentMeanFit fit_treatment_mean(const MultiProxyData& data, const PosteriorMatrix& w, const FeatureMap& phi,
                                    double ridge) {
  check_weights(data, w);
  const StackedSolution sol = solve_stacked(phi.design(data), w.weights, data.a, ridge);
  return TreatmentMeanFit{sol.coef, RegressionDiagnostics{sol.ridge, sol.escalated}};
}

TreatmentVarianceFit fit_treatment_variance(const MultiProxyData& data, const PosteriorMatrix& w,
                                            const Eigen::MatrixXd& alpha, const FeatureMap& phi) {
  check_weights(data, w);
  const Eigen::MatrixXd x = phi.design(data);
  if (alpha.rows() != w.weights.cols() || alpha.cols() != x.cols())
    throw DimensionMismatch("alpha does not match the weights and feature map");
  const Eigen::MatrixXd means = x * alpha.transpose();  // n x K
  const Eigen::VectorXd pooled = means.cwiseProduct(w.weights).rowwise().sum();
  const Eigen::VectorXd second = means.cwiseAbs2().cwiseProduct(w.weights).rowwise().sum();
  const Eigen::VectorXd spread = second - pooled.cwiseAbs2();
  const Eigen::VectorXd target = (data.a - pooled).cwiseAbs2() - spread;

  const StackedSolution sol = solve_stacked(Eigen::MatrixXd::Ones(data.size(), 1), w.weights, target);
  TreatmentVarianceFit out;
  out.sigma2 = sol.coef.col(0);
  out.diagnostics = RegressionDiagnostics{sol.ridge, sol.escalated};
  for (Eigen::Index u = 0; u < out.sigma2.size(); ++u) {
    if (!(out.sigma2(u) >= kSigmaFloor)) {
      out.sigma2(u) = kSigmaFloor;
      ++out.clamped;
    }
  }
  return out;
}

double normal_density(double x, double mean, double variance) {
  const double r = x - mean;
  return std::exp(-0.5 * r * r / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double treatment_density(const TreatmentModel& tm, int u, double a, const Eigen::VectorXd& phi) {
  return normal_density(a, tm.alpha.row(u).dot(phi), tm.sigma2(u));
}

Eigen::MatrixXd treatment_density_matrix(const TreatmentModel& tm, const MultiProxyData& data) {
  const Eigen::MatrixXd x = tm.features.design(data);
  const Eigen::MatrixXd means = x * tm.alpha.transpose();
  Eigen::MatrixXd out(means.rows(), means.cols());
  for (Eigen::Index u = 0; u < means.cols(); ++u)
    for (Eigen::Index i = 0; i < means.rows(); ++i) out(i, u) = normal_density(data.a(i), means(i, u), tm.sigma2(u));
  return out;
}

PosteriorMatrix update_posteriors(const PosteriorMatrix& w, const TreatmentModel& tm, const MultiProxyData& data) {
  check_weights(data, w);
  if (w.flavor != PosteriorFlavor::proxy_only) throw InvalidConfig("posterior update expects proxy-only weights");
  const Eigen::MatrixXd e = treatment_density_matrix(tm, data);
  PosteriorMatrix out;
  out.flavor = PosteriorFlavor::treatment_updated;
  out.weights = e.cwiseProduct(w.weights);
  for (Eigen::Index i = 0; i < out.weights.rows(); ++i) {
    const double total = out.weights.row(i).sum();
    if (total > 0.0 && std::isfinite(total)) {
      out.weights.row(i) /= total;
    } else {
      out.weights.row(i) = w.weights.row(i);
      ++out.fallback_rows;
    }
  }
  return out;
}

OutcomeModel fit_outcome(const MultiProxyData& data, const PosteriorMatrix& w_tilde, const FeatureMap& psi,
                         double ridge) {
  check_weights(data, w_tilde);
  const StackedSolution sol = solve_stacked(psi.design(data), w_tilde.weights, data.y, ridge);
  return OutcomeModel{sol.coef, psi, RegressionDiagnostics{sol.ridge, sol.escalated}};
}

double estimate_cate(const OutcomeModel& om, int u, double a, const std::array<Eigen::RowVectorXd, 3>& z) {
  return om.beta.row(u).dot(om.features.evaluate(a, {0.0, 0.0, 0.0}, z));
}

CausalEstimate make_causal_estimate(const Eigen::VectorXd& priors, const OutcomeModel& om,
                                    const MultiProxyData& data, const PosteriorMatrix& w) {
  check_weights(data, w);
  const Eigen::Index k = w.weights.cols();
  if (priors.size() != k || om.beta.rows() != k) throw DimensionMismatch("priors, outcome and weights disagree on K");
  // z-parts: every treatment factor set to one.
  const Eigen::MatrixXd g = om.features.design_at(data, 1.0);
  CausalEstimate ce{priors, om, Eigen::MatrixXd(k, g.cols())};
  for (Eigen::Index u = 0; u < k; ++u) {
    const double mass = w.weights.col(u).sum();
    if (!(mass >= kMinClusterMass)) {
      std::ostringstream msg;
      msg << "component " << u << " has total posterior mass " << mass << " below " << kMinClusterMass;
      throw DegenerateCluster(msg.str());
    }
    ce.feature_expectations.row(u) = (g.transpose() * w.weights.col(u)).transpose() / mass;
  }
  return ce;
}

Eigen::VectorXd ate_components(const CausalEstimate& ce, double a) {
  const auto& terms = ce.outcome.features.terms();
  Eigen::VectorXd scale(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t m = 0; m < terms.size(); ++m) {
    double p = 1.0;
    for (int j = 0; j < terms[m].treatment_power(); ++j) p *= a;
    scale(static_cast<Eigen::Index>(m)) = p;
  }
  Eigen::VectorXd out(ce.priors.size());
  for (Eigen::Index u = 0; u < out.size(); ++u)
    out(u) = ce.priors(u) * ce.outcome.beta.row(u).dot(ce.feature_expectations.row(u).cwiseProduct(scale.transpose()));
  return out;
}

double estimate_ate(const CausalEstimate& ce, double a) {
  const Eigen::VectorXd parts = ate_components(ce, a);
  double total = 0.0;
  for (Eigen::Index u = 0; u < parts.size(); ++u) total += parts(u);
  return total;
}

double estimate_ate(const Eigen::VectorXd& priors, const OutcomeModel& om, double a, const MultiProxyData& data,
                    const PosteriorMatrix& w) {
  return estimate_ate(make_causal_estimate(priors, om, data, w), a);
}

MultiProxyOptions with_default_features(MultiProxyOptions opts, int d) {
  if (opts.treatment_features.output_dim() == 0) opts.treatment_features = FeatureMap::linear_z({1}, d);
  if (opts.outcome_features.output_dim() == 0) opts.outcome_features = FeatureMap::constant_treat_linear({1}, d);
  return opts;
}

MultiProxyFit fit_causal_stages(const MultiProxyData& data, const MixtureEstimate& mixture,
                                const MultiProxyOptions& options) {
  const MultiProxyOptions opts = with_default_features(options, static_cast<int>(data.dim()));
  MultiProxyFit fit;
  fit.mixture = mixture;
  const PosteriorMatrix w = posteriors(mixture, data.z[0], data.z[1], data.z[2]);
  fit.proxy_fallback_rows = w.fallback_rows;

  const TreatmentMeanFit mean = fit_treatment_mean(data, w, opts.treatment_features, opts.ridge);
  const TreatmentVarianceFit var = fit_treatment_variance(data, w, mean.alpha, opts.treatment_features);
  fit.treatment.alpha = mean.alpha;
  fit.treatment.sigma2 = var.sigma2;
  fit.treatment.features = opts.treatment_features;
  fit.treatment.mean_fit = mean.diagnostics;
  fit.treatment.variance_fit = var.diagnostics;
  fit.treatment.clamped_variances = var.clamped;

  const PosteriorMatrix w_tilde = update_posteriors(w, fit.treatment, data);
  fit.treatment_fallback_rows = w_tilde.fallback_rows;
  fit.outcome = fit_outcome(data, w_tilde, opts.outcome_features, opts.ridge);
  fit.causal = make_causal_estimate(mixture.priors, fit.outcome, data, w);
  return fit;
}

MultiProxyFit fit_multiproxy(const MultiProxyData& data, const MultiProxyOptions& opts) {
  data.validate();
  const MixtureEstimate mixture =
      opts.symmetric_views ? fit_symmetric_spectral(data.z[0], data.z[1], data.z[2], opts.k, opts.mixture)
                           : fit_multiview(data.z[0], data.z[1], data.z[2], opts.k, opts.mixture);
  return fit_causal_stages(data, mixture, opts);
}

}  // namespace tensorcate
