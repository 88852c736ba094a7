#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "tensorcate/errors.hpp"
#include "tensorcate/kernel.hpp"
#include "tensorcate/mixture.hpp"

#include <cmath>

using namespace tensorcate;

namespace {

struct Planted1d {
  Eigen::MatrixXd z[3];
  Eigen::VectorXi labels;
};

// Exchangeable 1-d views: z_v | u ~ N(means[u], sigma^2).
Planted1d planted_1d(const std::vector<double>& priors, const std::vector<double>& means, double sigma, int n,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(priors.begin(), priors.end());
  std::normal_distribution<double> noise(0.0, sigma);
  Planted1d out;
  out.labels.resize(n);
  for (auto& z : out.z) z.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const int u = pick(rng);
    out.labels(i) = u;
    for (auto& z : out.z) z(i, 0) = means[static_cast<std::size_t>(u)] + noise(rng);
  }
  return out;
}

MixtureOptions small_options(std::uint64_t seed) {
  MixtureOptions opts;
  opts.seed = seed;
  opts.kernel.landmark_count = 300;
  return opts;
}

Eigen::VectorXd sorted(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

}  // namespace

TEST_CASE("gram") {
  const Eigen::MatrixXd x = Eigen::RowVector2d(0.3, -1.2);
  CHECK(gram(0.7, x, x)(0, 0) == 1.0);

  const double s = 1.3;
  Eigen::MatrixXd two(2, 2);
  two << 0.0, 0.0, s, s;  // distance sqrt(2) s
  CHECK(gram(s, two, two)(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  std::mt19937_64 rng(1);
  const Eigen::MatrixXd p = oracle::random_matrix(5, 3, rng);
  const Eigen::MatrixXd g = gram(0.9, p, p);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double d2 = (p.row(i) - p.row(j)).squaredNorm();
      worst = std::max(worst, std::abs(g(i, j) - std::exp(-d2 / (2 * 0.81))));
    }
  CHECK(worst <= 1e-14);
  CHECK((g - g.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("chol_psd") {
  SUBCASE("identity") {
    const CholeskyFactor f = chol_psd(Eigen::Matrix3d::Identity(), 0.0);
    CHECK((f.lower - Eigen::Matrix3d::Identity()).norm() == 0.0);
  }
  SUBCASE("2x2 reconstructs") {
    Eigen::Matrix2d g;
    g << 4, 2, 2, 2;
    const CholeskyFactor f = chol_psd(g, 0.0);
    CHECK((f.lower * f.lower.transpose() - g).norm() <= 1e-12);
  }
  SUBCASE("slightly indefinite matrix succeeds with jitter") {
    std::mt19937_64 rng(2);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(oracle::random_matrix(4, 4, rng));
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd g = q * Eigen::Vector4d(3, 2, 1, -1e-9).asDiagonal() * q.transpose();
    const CholeskyFactor f = chol_psd(g, 0.0);
    CHECK(f.jitter > 0.0);
    CHECK(f.jitter <= 1e-4);
    CHECK((f.lower * f.lower.transpose() - g).norm() <= 1e-8 * g.norm() + 2 * f.jitter);
  }
  SUBCASE("clearly indefinite matrix fails") {
    CHECK_THROWS_AS(chol_psd(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix(), 0.0), NotPSD);
  }
}

TEST_CASE("fit_symmetric_spectral on a planted 1-d mixture") {
  const Planted1d data = planted_1d({0.5, 0.5}, {0.0, 4.0}, 0.5, 5000, 7);
  const MixtureEstimate est = fit_symmetric_spectral(data.z[0], data.z[1], data.z[2], 2, MixtureOptions{});
  CHECK(est.priors.sum() == doctest::Approx(1.0).epsilon(1e-10));
  for (int u = 0; u < 2; ++u) {
    CHECK(std::abs(est.priors(u) - 0.5) <= 0.05);
    CHECK(est.raw_priors(u) == doctest::Approx(std::pow(est.lambdas(u), -2.0)));
  }
  // Component densities peak near the planted means.
  const Eigen::MatrixXd grid = (Eigen::MatrixXd(2, 1) << 0.0, 4.0).finished();
  const Eigen::MatrixXd f = density_matrix(est, 0, grid);
  const int first = f(0, 0) > f(0, 1) ? 0 : 1;
  CHECK(f(1, 1 - first) > f(1, first));

  const PosteriorMatrix p = posteriors(est, data.z[0], data.z[1], data.z[2]);
  const auto labels = map_assign(p);
  int agree = 0;
  for (int i = 0; i < 5000; ++i) agree += (labels[static_cast<std::size_t>(i)] == first) == (data.labels(i) == 0);
  CHECK(agree >= 0.99 * 5000);
}

TEST_CASE("K=1 gives a single prior of one") {
  const Planted1d data = planted_1d({1.0}, {1.0}, 1.0, 400, 3);
  const MixtureEstimate sym = fit_symmetric_spectral(data.z[0], data.z[1], data.z[2], 1, small_options(0));
  CHECK(sym.priors.size() == 1);
  CHECK(sym.priors(0) == 1.0);
  const MixtureEstimate multi = fit_multiview(data.z[0], data.z[1], data.z[2], 1, small_options(0));
  CHECK(multi.priors(0) == 1.0);
  const PosteriorMatrix p = posteriors(multi, data.z[0], data.z[1], data.z[2]);
  CHECK((p.weights.array() == 1.0).all());
}

TEST_CASE("lambda of sqrt(2) maps to prior one half") {
  const Eigen::Matrix2d v = Eigen::Matrix2d::Identity();
  const SymTensor3 t = SymTensor3::from_components(Eigen::Vector2d::Constant(std::sqrt(2.0)), v);
  const TensorEigenSet e = robust_power_method(t, 2);
  for (int u = 0; u < 2; ++u) CHECK(std::pow(e.lambdas(u), -2.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fit_multiview agrees with the symmetric fit on exchangeable views") {
  const Planted1d data = planted_1d({0.3, 0.7}, {0.0, 4.0}, 0.5, 3000, 11);
  const MixtureEstimate sym = fit_symmetric_spectral(data.z[0], data.z[1], data.z[2], 2, small_options(1));
  const MixtureEstimate multi = fit_multiview(data.z[0], data.z[1], data.z[2], 2, small_options(1));
  // Different moment estimators: agreement is up to sampling error.
  CHECK((sorted(sym.priors) - sorted(multi.priors)).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((sorted(multi.priors) - Eigen::Vector2d(0.3, 0.7)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("fits are bitwise deterministic") {
  const Planted1d data = planted_1d({0.5, 0.5}, {0.0, 3.0}, 0.5, 1500, 5);
  const MixtureEstimate a = fit_multiview(data.z[0], data.z[1], data.z[2], 2, small_options(9));
  const MixtureEstimate b = fit_multiview(data.z[0], data.z[1], data.z[2], 2, small_options(9));
  CHECK(a.priors == b.priors);
  CHECK(a.lambdas == b.lambdas);
  for (int v = 0; v < 3; ++v) {
    CHECK(a.views[v].anchors == b.views[v].anchors);
    CHECK(a.views[v].coefficients == b.views[v].coefficients);
  }
  CHECK(posteriors(a, data.z[0], data.z[1], data.z[2]).weights ==
        posteriors(b, data.z[0], data.z[1], data.z[2]).weights);
}

TEST_CASE("posterior rows are valid for fitted models") {
  const Planted1d data = planted_1d({0.4, 0.6}, {0.0, 2.0}, 0.7, 1000, 13);
  const MixtureEstimate est = fit_multiview(data.z[0], data.z[1], data.z[2], 2, small_options(2));
  CHECK(std::abs(est.priors.sum() - 1.0) <= 1e-10);
  CHECK((est.priors.array() >= 0).all());
  // Include far-away rows where every density hits the floor.
  Eigen::MatrixXd z[3];
  for (int v = 0; v < 3; ++v) {
    z[v] = data.z[v];
    z[v].conservativeResize(z[v].rows() + 2, Eigen::NoChange);
    z[v](z[v].rows() - 2, 0) = 100.0;
    z[v](z[v].rows() - 1, 0) = -80.0;
  }
  const PosteriorMatrix p = posteriors(est, z[0], z[1], z[2]);
  CHECK((p.weights.array() >= 0.0).all());
  CHECK((p.weights.array() <= 1.0).all());
  CHECK((p.weights.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(p.fallback_rows >= 2);
  CHECK((p.weights.row(p.weights.rows() - 1).transpose() - est.priors).norm() <= 1e-12);
}

TEST_CASE("fit_discrete_multiview") {
  SUBCASE("deterministic emissions") {
    std::mt19937_64 rng(21);
    std::bernoulli_distribution coin(0.5);
    const int n = 2000;
    Eigen::VectorXi a[3];
    for (auto& x : a) x.resize(n);
    // Component 0 emits level 0, 1 and 2 on views 1..3; component 1 emits 2, 0, 1.
    const int level[2][3] = {{0, 1, 2}, {2, 0, 1}};
    for (int i = 0; i < n; ++i) {
      const int u = coin(rng) ? 1 : 0;
      for (int v = 0; v < 3; ++v) a[v](i) = level[u][v];
    }
    const MixtureEstimate est = fit_discrete_multiview(a[0], a[1], a[2], 3, 2, small_options(0));
    CHECK(est.backend == MixtureBackend::discrete);
    const int c0 = est.views[0].emission(0, 0) > 0.5 ? 0 : 1;
    for (int v = 0; v < 3; ++v) {
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 2);
      expected(level[0][v], c0) = 1.0;
      expected(level[1][v], 1 - c0) = 1.0;
      CHECK((est.views[v].emission - expected).cwiseAbs().maxCoeff() <= 0.05);
      CHECK((est.views[v].emission.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-8);
    }
    CHECK((est.priors.array() - 0.5).abs().maxCoeff() <= 0.05);
  }
  SUBCASE("k=1 gives the empirical marginals") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> lvl(0, 3);
    Eigen::VectorXi a[3];
    for (auto& x : a) {
      x.resize(500);
      for (int i = 0; i < 500; ++i) x(i) = lvl(rng);
    }
    const MixtureEstimate est = fit_discrete_multiview(a[0], a[1], a[2], 4, 1, small_options(0));
    for (int v = 0; v < 3; ++v) {
      Eigen::Vector4d marginal = Eigen::Vector4d::Zero();
      for (int i = 0; i < 500; ++i) marginal(a[v](i)) += 1.0 / 500;
      CHECK((est.views[v].emission.col(0) - marginal).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(est.priors(0) == 1.0);
  }
  SUBCASE("fewer levels than components") {
    const Eigen::VectorXi a = Eigen::VectorXi::Zero(10);
    CHECK_THROWS_AS(fit_discrete_multiview(a, a, a, 2, 3, small_options(0)), RankDeficiency);
  }
}

TEST_CASE("density") {
  SUBCASE("discrete lookup") {
    MixtureEstimate est;
    est.backend = MixtureBackend::discrete;
    est.priors = Eigen::VectorXd::Ones(1);
    for (auto& v : est.views) v.emission = Eigen::Vector2d(0.2, 0.8);
    CHECK(density(est, 0, 0, Eigen::RowVectorXd::Constant(1, 1.0)) == 0.8);
  }
  SUBCASE("kernel single anchor and clamping") {
    MixtureEstimate est;
    est.backend = MixtureBackend::kernel;
    est.priors = Eigen::VectorXd::Ones(2);
    est.bandwidth = 0.5;
    for (auto& v : est.views) {
      v.anchors = Eigen::MatrixXd::Constant(1, 1, 0.25);
      v.coefficients = Eigen::RowVector2d(1.0, -0.003 / std::exp(-0.5 * 0.0));
    }
    const Eigen::RowVectorXd z = Eigen::RowVectorXd::Constant(1, 0.75);
    CHECK(density(est, 1, 0, z) == doctest::Approx(std::exp(-0.25 / (2 * 0.25))).epsilon(1e-15));
    CHECK(density(est, 1, 1, Eigen::RowVectorXd::Constant(1, 0.25)) == est.density_floor);
  }
  SUBCASE("unfitted estimate") {
    CHECK_THROWS_AS(density(MixtureEstimate{}, 0, 0, Eigen::RowVectorXd::Zero(1)), UnfittedModel);
  }
}

TEST_CASE("bayes_posteriors") {
  SUBCASE("two unit Gaussians at z=(0,0,0)") {
    std::array<Eigen::MatrixXd, 3> lik;
    for (auto& l : lik) l = Eigen::RowVector2d(oracle::normal_pdf(0, 0, 1), oracle::normal_pdf(0, 2, 1));
    const PosteriorMatrix p = bayes_posteriors(Eigen::Vector2d(0.5, 0.5), lik, 1e-300);
    CHECK(p.weights(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-6.0))).epsilon(1e-14));
    CHECK(p.weights(0, 0) == doctest::Approx(0.997527).epsilon(1e-6));
  }
  SUBCASE("identical densities give the priors") {
    std::array<Eigen::MatrixXd, 3> lik;
    for (auto& l : lik) l = Eigen::MatrixXd::Constant(4, 3, 0.37);
    const Eigen::Vector3d pi(0.2, 0.5, 0.3);
    const PosteriorMatrix p = bayes_posteriors(pi, lik, 1e-12);
    for (int i = 0; i < 4; ++i) CHECK((p.weights.row(i).transpose() - pi).norm() <= 1e-15);
    CHECK(p.fallback_rows == 0);
  }
  SUBCASE("K=1") {
    std::array<Eigen::MatrixXd, 3> lik;
    for (auto& l : lik) l = Eigen::MatrixXd::Constant(3, 1, 0.1);
    CHECK((bayes_posteriors(Eigen::VectorXd::Ones(1), lik, 1e-12).weights.array() == 1.0).all());
  }
  SUBCASE("all-floor row falls back to the priors") {
    std::array<Eigen::MatrixXd, 3> lik;
    for (auto& l : lik) l = Eigen::RowVector2d(1e-12, 1e-12);
    const PosteriorMatrix p = bayes_posteriors(Eigen::Vector2d(0.3, 0.7), lik, 1e-12);
    CHECK(p.fallback_rows == 1);
    CHECK(p.weights(0, 1) == doctest::Approx(0.7));
  }
}

TEST_CASE("scree and select_rank") {
  SUBCASE("exact rank 3") {
    // Each view only takes three distinct values, so the cross-moment has rank 3.
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> pick(0, 2);
    const Eigen::MatrixXd centers = oracle::random_matrix(3, 2, rng);
    Eigen::MatrixXd z1(600, 2), z2(600, 2);
    for (int i = 0; i < 600; ++i) {
      z1.row(i) = centers.row(pick(rng));
      z2.row(i) = centers.row(pick(rng));
    }
    KernelSpec kernel;
    kernel.rule = BandwidthRule::fixed;
    kernel.bandwidth = 1.0;
    kernel.landmark_count = 50;
    const Eigen::VectorXd s = scree(z1, z2, kernel, 6, 0);
    CHECK(s(3) <= 1e-10 * s(0));

    Eigen::VectorXi a1(600), a2(600);
    for (int i = 0; i < 600; ++i) {
      a1(i) = pick(rng);
      a2(i) = a1(i);
    }
    const Eigen::VectorXd d = discrete_scree(a1, a2, 5, 5);
    CHECK(d(3) <= 1e-10 * d(0));
  }
  SUBCASE("planted K=2 and pure noise") {
    KernelSpec kernel;
    kernel.rule = BandwidthRule::fixed;
    kernel.bandwidth = 1.0;
    kernel.landmark_count = 300;
    const Planted1d two = planted_1d({0.5, 0.5}, {0.0, 5.0}, 0.5, 3000, 17);
    CHECK(select_rank(scree(two.z[0], two.z[1], kernel, 8, 0), 3000) == 2);
    const Planted1d one = planted_1d({1.0}, {0.0}, 1.0, 3000, 19);
    CHECK(select_rank(scree(one.z[0], one.z[1], kernel, 8, 0), 3000) == 1);
  }
  SUBCASE("gap rule") {
    CHECK(select_rank(Eigen::Vector4d(10, 9, 1, 0.9), 1000000) == 2);
    CHECK(select_rank(Eigen::Vector3d(10, 1, 0.9), 1000000) == 1);
  }
}

TEST_CASE("align_permutation") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd ref = oracle::random_matrix(3, 4, rng);
  CHECK(align_permutation(ref, ref).perm == std::vector<int>{0, 1, 2});

  Eigen::MatrixXd swapped = ref;
  swapped.row(0) = ref.row(1);
  swapped.row(1) = ref.row(0);
  CHECK(align_permutation(swapped, ref).perm == std::vector<int>{1, 0, 2});

  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd est = oracle::random_matrix(3, 4, rng);
    const Eigen::MatrixXd target = oracle::random_matrix(3, 4, rng);
    const Alignment a = align_permutation(est, target);
    CHECK(a.perm == oracle::best_permutation(est, target));
    CHECK_FALSE(a.greedy);
  }

  const Eigen::MatrixXd big = oracle::random_matrix(9, 2, rng);
  const Alignment g = align_permutation(big, big);
  CHECK(g.greedy);
  CHECK(g.cost == doctest::Approx(0.0));
}

TEST_CASE("permute reorders every component field") {
  MixtureEstimate est;
  est.backend = MixtureBackend::discrete;
  est.priors = Eigen::Vector2d(0.3, 0.7);
  est.raw_priors = est.priors;
  est.lambdas = Eigen::Vector2d(1.0, 2.0);
  for (auto& v : est.views) v.emission = (Eigen::Matrix2d() << 0.9, 0.2, 0.1, 0.8).finished();
  const MixtureEstimate p = permute(est, {1, 0});
  CHECK(p.priors(0) == 0.7);
  CHECK(p.lambdas(0) == 2.0);
  CHECK(p.views[2].emission(0, 0) == 0.2);
}

TEST_CASE("map_assign") {
  PosteriorMatrix p;
  p.weights.resize(2, 2);
  p.weights << 0.1, 0.9, 0.5, 0.5;
  CHECK(map_assign(p) == std::vector<int>{1, 0});

  // Exact posteriors of a well-separated mixture recover the labels.
  const Planted1d data = planted_1d({0.5, 0.5}, {0.0, 4.0}, 0.5, 2000, 23);
  std::array<Eigen::MatrixXd, 3> lik;
  for (int v = 0; v < 3; ++v) {
    lik[v].resize(2000, 2);
    for (int i = 0; i < 2000; ++i)
      for (int u = 0; u < 2; ++u) lik[v](i, u) = oracle::normal_pdf(data.z[v](i, 0), 4.0 * u, 0.25);
  }
  const auto labels = map_assign(bayes_posteriors(Eigen::Vector2d(0.5, 0.5), lik, 1e-300));
  int agree = 0;
  for (int i = 0; i < 2000; ++i) agree += labels[static_cast<std::size_t>(i)] == data.labels(i);
  CHECK(agree >= 0.99 * 2000);
}
