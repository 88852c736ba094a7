#include "tensorcate/kernel.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace tensorcate {

std::string to_string(BandwidthRule rule) {
  switch (rule) {
    case BandwidthRule::fixed: return "fixed";
    case BandwidthRule::median_heuristic: return "median_heuristic";
    case BandwidthRule::power_rule: return "power_rule";
  }
  return "unknown";
}

BandwidthRule bandwidth_rule_from_string(const std::string& name) {
  if (name == "fixed") return BandwidthRule::fixed;
  if (name == "median_heuristic" || name == "median") return BandwidthRule::median_heuristic;
  if (name == "power_rule" || name == "power") return BandwidthRule::power_rule;
  throw InvalidConfig("unknown bandwidth rule '" + name + "'");
}

std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (count >= n) return idx;
  // Partial Fisher-Yates; selection depends only on the seed.
  Rng rng(seed);
  for (Eigen::Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

double median_pairwise_distance(const Eigen::MatrixXd& points, Eigen::Index max_points, std::uint64_t seed) {
  const auto rows = subsample_indices(points.rows(), max_points, seed);
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - (rows.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      dist.push_back((points.row(rows[i]) - points.row(rows[j])).norm());
  if (dist.empty()) return 0.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  if (dist.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dist.begin(), mid);
  return 0.5 * (lower + upper);
}

KernelSpec resolve_bandwidth(const KernelSpec& spec, const Eigen::MatrixXd& points, Eigen::Index n,
                             std::uint64_t seed) {
  KernelSpec out = spec;
  switch (spec.rule) {
    case BandwidthRule::fixed:
      break;
    case BandwidthRule::median_heuristic:
      out.bandwidth = median_pairwise_distance(points, 1000, split_seed(seed, stream::kBandwidth));
      break;
    case BandwidthRule::power_rule: {
      const double d = static_cast<double>(points.cols());
      out.bandwidth = spec.power_c * std::pow(static_cast<double>(std::max<Eigen::Index>(n, 1)),
                                              -1.0 / (2.0 * spec.power_b + 7.0 * d));
      break;
    }
  }
  if (!(out.bandwidth > 0.0) || !std::isfinite(out.bandwidth)) {
    std::ostringstream msg;
    msg << "kernel bandwidth resolved to " << out.bandwidth << " using rule " << to_string(spec.rule);
    throw InvalidConfig(msg.str());
  }
  return out;
}

double rbf(const double* x, const double* y, Eigen::Index dim, double bandwidth) {
  double d2 = 0.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double diff = x[c] - y[c];
    d2 += diff * diff;
  }
  return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
}

Eigen::MatrixXd gram(double bandwidth, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) throw DimensionMismatch("gram: point dimensions differ");
  const Eigen::Index dim = x.cols();
  // Row-major copies give contiguous points.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> yr = y;
  Eigen::MatrixXd out(x.rows(), y.rows());
  for (Eigen::Index j = 0; j < y.rows(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = rbf(xr.row(i).data(), yr.row(j).data(), dim, bandwidth);
  return out;
}

CholeskyFactor chol_psd(const Eigen::MatrixXd& g, double jitter) {
  if (g.rows() != g.cols()) throw DimensionMismatch("chol_psd: matrix must be square");
  constexpr double kMaxJitter = 1e-4;
  double current = std::max(jitter, 0.0);
  const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
  while (true) {
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (current > 0.0) {
      Eigen::MatrixXd shifted = sym;
      shifted.diagonal().array() += current;
      llt.compute(shifted);
    } else {
      llt.compute(sym);
    }
    if (llt.info() == Eigen::Success) return CholeskyFactor{llt.matrixL(), current};
    const double next = current > 0.0 ? current * 10.0 : 1e-12;
    if (next > kMaxJitter * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "matrix is not positive semidefinite: Cholesky failed with jitter up to " << current;
      throw NotPSD(msg.str());
    }
    current = next;
  }
}

AnchorBasis::AnchorBasis(Eigen::MatrixXd anchors, double bandwidth, double jitter)
    : anchors_(std::move(anchors)), bandwidth_(bandwidth) {
  if (anchors_.rows() == 0) throw EmptyInput("anchor basis needs at least one anchor");
  factor_ = chol_psd(gram(bandwidth_, anchors_, anchors_), jitter);
}

Eigen::MatrixXd AnchorBasis::features(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd k = gram(bandwidth_, anchors_, points);  // m x n
  factor_.lower.triangularView<Eigen::Lower>().solveInPlace(k);
  return k.transpose();
}

Eigen::MatrixXd AnchorBasis::coefficients(const Eigen::MatrixXd& coords) const {
  Eigen::MatrixXd c = coords;
  factor_.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(c);
  return c;
}

}  // namespace tensorcate
