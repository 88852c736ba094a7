#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "tensorcate/datagen.hpp"
#include "tensorcate/errors.hpp"
#include "tensorcate/multitreatment.hpp"

using namespace tensorcate;

namespace {

// Two components on disjoint level sets: component 0 uses levels {0, 1} and
// component 1 uses {2, 3} in every view, so the label is observable.
MultiTreatmentScenario disjoint_scenario() {
  MultiTreatmentScenario s;
  s.priors = Eigen::Vector2d(0.4, 0.6);
  const Eigen::MatrixXd e = (Eigen::MatrixXd(4, 2) << 0.3, 0, 0.7, 0, 0, 0.55, 0, 0.45).finished();
  s.emissions = {e, e, e};
  s.gamma = MultiTreatmentScenario::paper_default().gamma;
  s.noise_sigma = 0.0;
  return s;
}

MultiTreatmentModel model_with(const Eigen::VectorXd& priors, const Eigen::MatrixXd& gamma) {
  MultiTreatmentModel m;
  m.mixture.backend = MixtureBackend::discrete;
  m.mixture.priors = priors;
  for (auto& v : m.mixture.views) v.emission = Eigen::MatrixXd::Constant(5, priors.size(), 0.2);
  m.gamma = gamma;
  m.xi = FeatureMap::treatments_linear();
  return m;
}

}  // namespace

TEST_CASE("K=1 is least squares on xi") {
  const MultiTreatmentSample s = simulate_multitreatment(MultiTreatmentScenario::paper_default(), 800, 1);
  MultiTreatmentOptions opts;
  opts.k = 1;
  const MultiTreatmentModel m = fit_multitreatment(s.data, opts);
  const Eigen::VectorXd ref = oracle::ols(FeatureMap::treatments_linear().design(s.data), s.data.y);
  CHECK((m.gamma.row(0).transpose() - ref).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(m.priors()(0) == 1.0);
}

TEST_CASE("observable labels and a noiseless outcome recover gamma exactly") {
  const MultiTreatmentScenario sc = disjoint_scenario();
  const MultiTreatmentSample s = simulate_multitreatment(sc, 2000, 2);
  MultiTreatmentOptions opts;
  opts.k = 2;
  const MultiTreatmentModel m = fit_multitreatment(s.data, opts);
  const std::vector<int> perm = align_permutation(m.gamma, sc.gamma).perm;
  for (int u = 0; u < 2; ++u)
    CHECK((m.gamma.row(perm[static_cast<std::size_t>(u)]) - sc.gamma.row(u)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("one-hot posteriors give per-group least squares") {
  MultiTreatmentScenario sc = disjoint_scenario();
  sc.noise_sigma = 1.0;
  const MultiTreatmentSample s = simulate_multitreatment(sc, 1500, 3);
  MixtureEstimate truth;
  truth.backend = MixtureBackend::discrete;
  truth.priors = sc.priors;
  for (int v = 0; v < 3; ++v) truth.views[v].emission = sc.emissions[v];
  truth.density_floor = 1e-300;
  const MultiTreatmentModel m = fit_multitreatment_outcome(s.data, truth, FeatureMap::treatments_linear());
  const Eigen::MatrixXd ref =
      oracle_group_ols(FeatureMap::treatments_linear().design(s.data), s.data.y, s.labels, 2);
  CHECK((m.gamma - ref).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(m.fallback_rows == 0);
}

TEST_CASE("mt_cate") {
  const Eigen::MatrixXd gamma = MultiTreatmentScenario::paper_default().gamma;
  const MultiTreatmentModel m = model_with(Eigen::Vector2d(0.5, 0.5), gamma);
  CHECK(mt_cate(m, 0, {0, 0, 0}) == 1.0);
  CHECK(mt_cate(model_with(Eigen::Vector2d(0.5, 0.5), Eigen::MatrixXd::Zero(2, 4)), 1, {3, 1, 4}) == 0.0);
  double worst = 0.0;
  for (int a1 = 0; a1 < 5; ++a1)
    for (int a2 = 0; a2 < 5; ++a2)
      for (int a3 = 0; a3 < 5; ++a3)
        for (int u = 0; u < 2; ++u) {
          const double ref = gamma(u, 0) + gamma(u, 1) * a1 + gamma(u, 2) * a2 + gamma(u, 3) * a3;
          worst = std::max(worst, std::abs(mt_cate(m, u, {double(a1), double(a2), double(a3)}) - ref));
        }
  CHECK(worst <= 1e-14);
}

TEST_CASE("mt_ate") {
  const Eigen::MatrixXd gamma = MultiTreatmentScenario::paper_default().gamma;
  CHECK(mt_ate(model_with(Eigen::Vector2d(0.5, 0.5), gamma), {1, 1, 1}) == doctest::Approx(1.9).epsilon(1e-14));

  const Eigen::MatrixXd same = (Eigen::MatrixXd(3, 4) << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4).finished();
  CHECK(mt_ate(model_with(Eigen::Vector3d(0.2, 0.3, 0.5), same), {2, 0, 1}) == doctest::Approx(1 + 4 + 4));

  // Simultaneous permutation of all component blocks.
  const MultiTreatmentSample s = simulate_multitreatment(MultiTreatmentScenario::paper_default(), 3000, 4);
  MultiTreatmentOptions opts;
  const MultiTreatmentModel m = fit_multitreatment(s.data, opts);
  MultiTreatmentModel swapped = m;
  swapped.mixture = permute(m.mixture, {1, 0});
  swapped.gamma.row(0) = m.gamma.row(1);
  swapped.gamma.row(1) = m.gamma.row(0);
  for (double a : {0.0, 2.0, 4.0})
    CHECK(std::abs(mt_ate(swapped, {a, 1, 3}) - mt_ate(m, {a, 1, 3})) <= 1e-12);
}

TEST_CASE("fitted multi-treatment model invariants") {
  const MultiTreatmentSample s = simulate_multitreatment(MultiTreatmentScenario::paper_default(), 3000, 5);
  const MultiTreatmentModel m = fit_multitreatment(s.data, MultiTreatmentOptions{});
  CHECK(std::abs(m.priors().sum() - 1.0) <= 1e-10);
  for (const auto& v : m.mixture.views) CHECK((v.emission.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-8);
  const PosteriorMatrix p = posteriors(m.mixture, s.data.a[0], s.data.a[1], s.data.a[2]);
  CHECK((p.weights.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK((p.weights.array() >= 0.0).all());
}
