#include "tensorcate/multitreatment.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/regression.hpp"

namespace tensorcate {

MultiTreatmentModel fit_multitreatment_outcome(const MultiTreatmentData& data, const MixtureEstimate& mixture,
                                               const FeatureMap& xi, double ridge) {
  data.validate();
  if (data.size() == 0) throw EmptyInput("no samples");
  const PosteriorMatrix w = posteriors(mixture, data.a[0], data.a[1], data.a[2]);
  const StackedSolution sol = solve_stacked(xi.design(data), w.weights, data.y, ridge);
  MultiTreatmentModel m;
  m.mixture = mixture;
  m.gamma = sol.coef;
  m.xi = xi;
  m.fit = RegressionDiagnostics{sol.ridge, sol.escalated};
  m.fallback_rows = w.fallback_rows;
  return m;
}

MultiTreatmentModel fit_multitreatment(const MultiTreatmentData& data, const MultiTreatmentOptions& opts) {
  data.validate();
  const FeatureMap xi = opts.xi.output_dim() == 0 ? FeatureMap::treatments_linear() : opts.xi;
  const MixtureEstimate mixture =
      fit_discrete_multiview(data.a[0], data.a[1], data.a[2], data.levels, opts.k, opts.mixture);
  return fit_multitreatment_outcome(data, mixture, xi, opts.ridge);
}

double mt_cate(const MultiTreatmentModel& m, int u, const std::array<double, 3>& a) {
  if (u < 0 || u >= m.gamma.rows()) throw DimensionMismatch("component index out of range");
  return m.gamma.row(u).dot(m.xi.evaluate(0.0, a, {}));
}

double mt_ate(const MultiTreatmentModel& m, const std::array<double, 3>& a) {
  const Eigen::VectorXd x = m.xi.evaluate(0.0, a, {});
  double total = 0.0;
  for (Eigen::Index u = 0; u < m.gamma.rows(); ++u) total += m.priors()(u) * m.gamma.row(u).dot(x);
  return total;
}

}  // namespace tensorcate
