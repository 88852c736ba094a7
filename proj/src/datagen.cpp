#include "tensorcate/datagen.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/random.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace tensorcate {

namespace {

void check_priors(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw InvalidConfig("scenario needs at least one component");
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-10) throw InvalidConfig("scenario priors must sum to 1");
}

std::discrete_distribution<int> categorical(const Eigen::VectorXd& p) {
  return std::discrete_distribution<int>(p.data(), p.data() + p.size());
}

double log_normal_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * r * r / var;
}

}  // namespace

void MultiProxyScenario::validate() const {
  check_priors(priors);
  const Eigen::Index k = priors.size(), d = means[0].cols();
  for (const auto& m : means)
    if (m.rows() != k || m.cols() != d) throw InvalidConfig("proxy means must be K x d for every view");
  if (alpha.rows() != k || alpha.cols() != d) throw InvalidConfig("alpha must be K x d");
  if (sigma2.size() != k || (sigma2.array() <= 0.0).any()) throw InvalidConfig("sigma2 must hold K positive values");
  if (beta.rows() != k || beta.cols() != d + 2) throw InvalidConfig("beta must be K x (d + 2)");
  if (!(proxy_sigma > 0.0) || !(outcome_sigma >= 0.0)) throw InvalidConfig("noise scales must be positive");
}

MultiProxyScenario MultiProxyScenario::paper_default() {
  MultiProxyScenario s;
  s.priors = Eigen::Vector3d(0.33, 0.33, 0.34);
  s.means[0] = (Eigen::Matrix3d() << -3, 0, 0, 0, 3, 0, 3, -1, 2).finished();
  s.means[1] = (Eigen::Matrix3d() << 0, -3, 1, -2, 0, 3, 3, 0, 0).finished();
  s.means[2] = (Eigen::Matrix3d() << 3, 1, -1, 1, 0, 3, 0, -2, 0).finished();
  s.proxy_sigma = 0.8;
  s.alpha = (Eigen::Matrix3d() << 1.0, 0.5, -0.5, -0.5, 1.0, 0.5, 0.5, -0.5, 1.0).finished();
  s.sigma2 = Eigen::Vector3d(0.6, 1.0, 0.8);
  s.beta.resize(3, 5);
  s.beta << 1.0, 2.5, 0.5, 0.5, 0.5,
            5.0, -1.0, -0.5, 0.5, -0.5,
            2.0, 4.0, 1.0, -1.0, 1.0;
  s.outcome_sigma = 1.0;
  return s;
}

void MultiTreatmentScenario::validate() const {
  check_priors(priors);
  const Eigen::Index k = priors.size(), levels = emissions[0].rows();
  for (const auto& e : emissions) {
    if (e.rows() != levels || e.cols() != k) throw InvalidConfig("emission matrices must be S x K for every view");
    if ((e.array() < 0.0).any() || ((e.colwise().sum().array() - 1.0).abs() > 1e-8).any())
      throw InvalidConfig("emission columns must be probability vectors");
    if (Eigen::FullPivLU<Eigen::MatrixXd>(e).rank() < k) throw InvalidConfig("emission matrices need full column rank");
  }
  if (gamma.rows() != k || gamma.cols() != 4) throw InvalidConfig("gamma must be K x 4");
  if (!(noise_sigma >= 0.0)) throw InvalidConfig("noise scale must be nonnegative");
}

MultiTreatmentScenario MultiTreatmentScenario::paper_default() {
  MultiTreatmentScenario s;
  s.priors = Eigen::Vector2d(0.5, 0.5);
  // Flat Dirichlet draws (seed 0) with full column rank; mirrored in
  // configs/paper-7.2.json.
  s.emissions[0].resize(5, 2);
  s.emissions[0] << 0.29927266982747547, 0.13658683849231343,
                    0.44877662736943341, 0.056445354695687004,
                    0.008717921248874971, 0.06329324825661109,
                    0.00099884628245498091, 0.23604291507257738,
                    0.24223393527176129, 0.5076316434828112;
  s.emissions[1].resize(5, 2);
  s.emissions[1] << 0.49060623844155676, 0.13798892674010252,
                    0.00019223859407300483, 0.51199859022323968,
                    0.33873613252621565, 0.057542190110889291,
                    0.010822635914488026, 0.049919057301824547,
                    0.15964275452366652, 0.24255123562394393;
  s.emissions[2].resize(5, 2);
  s.emissions[2] << 0.0099613973239289152, 0.086857196268453701,
                    0.036430568284241072, 0.094109609504898675,
                    0.27732562788775916, 0.38887885423359286,
                    0.20850559663397766, 0.36223846555667666,
                    0.46777680987009329, 0.067915874436378171;
  for (auto& e : s.emissions)
    for (Eigen::Index u = 0; u < e.cols(); ++u) e.col(u) /= e.col(u).sum();
  s.gamma.resize(2, 4);
  s.gamma << 1.0, 0.5, 2.5, -0.5,
             -1.0, 1.5, -1.0, 0.8;
  s.noise_sigma = 1.0;
  return s;
}

MultiProxySample simulate_multiproxy(const MultiProxyScenario& s, Eigen::Index n, std::uint64_t seed) {
  s.validate();
  const Eigen::Index d = s.d();
  Rng rng = make_rng(seed, stream::kSimulation);
  auto pick = categorical(s.priors);
  std::normal_distribution<double> normal(0.0, 1.0);

  MultiProxySample out;
  for (auto& z : out.data.z) z.resize(n, d);
  out.data.a.resize(n);
  out.data.y.resize(n);
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int u = pick(rng);
    out.labels(i) = u;
    for (std::size_t v = 0; v < 3; ++v)
      for (Eigen::Index j = 0; j < d; ++j) out.data.z[v](i, j) = s.means[v](u, j) + s.proxy_sigma * normal(rng);
    const double a = s.alpha.row(u).dot(out.data.z[0].row(i)) + std::sqrt(s.sigma2(u)) * normal(rng);
    out.data.a(i) = a;
    const double mean = s.beta(u, 0) + s.beta(u, 1) * a + s.beta.row(u).tail(d).dot(out.data.z[0].row(i));
    out.data.y(i) = mean + s.outcome_sigma * normal(rng);
  }
  return out;
}

MultiTreatmentSample simulate_multitreatment(const MultiTreatmentScenario& s, Eigen::Index n, std::uint64_t seed) {
  s.validate();
  Rng rng = make_rng(seed, stream::kSimulation);
  auto pick = categorical(s.priors);
  std::array<std::vector<std::discrete_distribution<int>>, 3> emit;
  for (std::size_t v = 0; v < 3; ++v)
    for (int u = 0; u < s.k(); ++u) emit[v].push_back(categorical(s.emissions[v].col(u)));
  std::normal_distribution<double> normal(0.0, 1.0);

  MultiTreatmentSample out;
  out.data.levels = s.levels();
  for (auto& a : out.data.a) a.resize(n);
  out.data.y.resize(n);
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int u = pick(rng);
    out.labels(i) = u;
    double mean = s.gamma(u, 0);
    for (std::size_t v = 0; v < 3; ++v) {
      const int level = emit[v][static_cast<std::size_t>(u)](rng);
      out.data.a[v](i) = level;
      mean += s.gamma(u, static_cast<Eigen::Index>(v) + 1) * level;
    }
    out.data.y(i) = mean + s.noise_sigma * normal(rng);
  }
  return out;
}

std::array<Eigen::MatrixXd, 3> oracle_likelihoods(const MultiProxyScenario& s, const MultiProxyData& data) {
  s.validate();
  const Eigen::Index n = data.z[0].rows();
  const double var = s.proxy_sigma * s.proxy_sigma;
  std::array<Eigen::MatrixXd, 3> out;
  for (std::size_t v = 0; v < 3; ++v) {
    out[v].resize(n, s.k());
    for (Eigen::Index i = 0; i < n; ++i)
      for (int u = 0; u < s.k(); ++u) {
        double log_f = 0.0;
        for (Eigen::Index j = 0; j < s.d(); ++j) log_f += log_normal_pdf(data.z[v](i, j), s.means[v](u, j), var);
        out[v](i, u) = std::exp(log_f);
      }
  }
  return out;
}

PosteriorMatrix oracle_posteriors(const MultiProxyScenario& s, const MultiProxyData& data, PosteriorFlavor flavor) {
  s.validate();
  const Eigen::Index n = data.z[0].rows();
  const int k = s.k();
  const double var = s.proxy_sigma * s.proxy_sigma;
  PosteriorMatrix out;
  out.flavor = flavor;
  out.weights.resize(n, k);
  Eigen::VectorXd log_w(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int u = 0; u < k; ++u) {
      double lw = std::log(s.priors(u));
      for (std::size_t v = 0; v < 3; ++v)
        for (Eigen::Index j = 0; j < s.d(); ++j) lw += log_normal_pdf(data.z[v](i, j), s.means[v](u, j), var);
      if (flavor == PosteriorFlavor::treatment_updated)
        lw += log_normal_pdf(data.a(i), s.alpha.row(u).dot(data.z[0].row(i)), s.sigma2(u));
      log_w(u) = lw;
    }
    const double top = log_w.maxCoeff();
    const Eigen::VectorXd e = (log_w.array() - top).exp();
    out.weights.row(i) = e.transpose() / e.sum();
  }
  return out;
}

MonteCarloValue oracle_ate(const MultiProxyScenario& s, double a, Eigen::Index draws, std::uint64_t seed) {
  s.validate();
  if (draws < 2) throw InvalidConfig("Monte-Carlo oracle needs at least two draws");
  Rng rng = make_rng(seed, stream::kOracle);
  auto pick = categorical(s.priors);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = s.d();
  double mean = 0.0, m2 = 0.0;
  Eigen::VectorXd z(d);
  for (Eigen::Index t = 0; t < draws; ++t) {
    const int u = pick(rng);
    for (Eigen::Index j = 0; j < d; ++j) z(j) = s.means[0](u, j) + s.proxy_sigma * normal(rng);
    const double value = s.beta(u, 0) + s.beta(u, 1) * a + s.beta.row(u).tail(d).dot(z.transpose());
    // Welford update.
    const double delta = value - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (value - mean);
  }
  const double var = m2 / static_cast<double>(draws - 1);
  return MonteCarloValue{mean, std::sqrt(var / static_cast<double>(draws))};
}

Eigen::MatrixXd oracle_group_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXi& labels,
                                 int k) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, x.cols());
  for (int u = 0; u < k; ++u) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels(i) == u) rows.push_back(i);
    if (rows.empty()) continue;
    Eigen::MatrixXd xu(static_cast<Eigen::Index>(rows.size()), x.cols());
    Eigen::VectorXd yu(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      xu.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
      yu(static_cast<Eigen::Index>(r)) = y(rows[r]);
    }
    out.row(u) = xu.colPivHouseholderQr().solve(yu).transpose();
  }
  return out;
}

}  // namespace tensorcate
