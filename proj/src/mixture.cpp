#include "tensorcate/mixture.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tensorcate {

std::string to_string(MixtureBackend backend) {
  return backend == MixtureBackend::kernel ? "kernel" : "discrete";
}

namespace {

struct AssignmentResult {
  std::vector<int> perm;
  double best = 0.0;
  double second = -std::numeric_limits<double>::infinity();
  bool greedy = false;
};

// Maximizes sum_u score(u, perm[u]).
AssignmentResult best_assignment(const Eigen::MatrixXd& score) {
  const int k = static_cast<int>(score.rows());
  AssignmentResult out;
  if (k <= kMaxExhaustiveK) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    bool first = true;
    do {
      double total = 0.0;
      for (int u = 0; u < k; ++u) total += score(u, perm[static_cast<std::size_t>(u)]);
      if (first || total > out.best) {
        if (!first) out.second = out.best;
        out.best = total;
        out.perm = perm;
        first = false;
      } else if (total > out.second) {
        out.second = total;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }
  // Greedy: repeatedly take the largest remaining entry.
  out.greedy = true;
  out.perm.assign(static_cast<std::size_t>(k), -1);
  std::vector<bool> row_used(static_cast<std::size_t>(k), false), col_used(static_cast<std::size_t>(k), false);
  for (int step = 0; step < k; ++step) {
    int bi = -1, bj = -1;
    double bv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < k; ++j) {
        if (col_used[static_cast<std::size_t>(j)]) continue;
        if (score(i, j) > bv) {
          bv = score(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[static_cast<std::size_t>(bi)] = col_used[static_cast<std::size_t>(bj)] = true;
    out.perm[static_cast<std::size_t>(bi)] = bj;
    out.best += bv;
  }
  return out;
}

[[noreturn]] void throw_rank(RankFailure failure, const std::string& what) {
  if (failure == RankFailure::rank_deficiency) throw RankDeficiency(what);
  throw DegenerateSpectrum(what);
}

TruncatedSvd checked_svd(const Eigen::MatrixXd& m, int k, std::uint64_t seed, RankFailure failure,
                         const char* label) {
  const Eigen::Index small = std::min(m.rows(), m.cols());
  if (k > small) {
    std::ostringstream msg;
    msg << (failure == RankFailure::rank_deficiency ? "rank deficiency" : "degenerate spectrum") << " at k=" << k
        << ": " << label << " has only " << small << " dimensions";
    throw_rank(failure, msg.str());
  }
  TruncatedSvd svd = top_k_svd(m, k, seed);
  const double top = svd.values(0);
  const double kth = svd.values(k - 1);
  if (!(top > 0.0) || !(kth > kRelativeEigenFloor * top)) {
    std::ostringstream msg;
    msg << (failure == RankFailure::rank_deficiency ? "rank deficiency" : "degenerate spectrum") << " at k=" << k
        << ": " << label << " singular value " << kth << " relative to " << top;
    throw_rank(failure, msg.str());
  }
  return svd;
}

Eigen::VectorXd clamp_priors(const Eigen::VectorXd& raw, int* clamped) {
  Eigen::VectorXd p(raw.size());
  int count = 0;
  for (Eigen::Index u = 0; u < raw.size(); ++u) {
    double v = raw(u);
    if (!std::isfinite(v) || v < kPriorFloor) {
      v = kPriorFloor;
      ++count;
    } else if (v > 1.0) {
      v = 1.0;
      ++count;
    }
    p(u) = v;
  }
  if (clamped) *clamped = count;
  return p / p.sum();
}

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (s > 0.0) m.row(i) /= s;
  }
  return m;
}

CrossViewDecomposition decompose_with_moments(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                                              const Eigen::MatrixXd& xt, const Eigen::MatrixXd& p_ab,
                                              const Eigen::MatrixXd& p_ta, int k, const PowerMethodOptions& power,
                                              RankFailure failure);

// Three cross-view decompositions, one per target view, aligned to the
// first by the co-membership of their single-view posteriors.
struct CrossViewFit {
  std::array<Eigen::MatrixXd, 3> means;  // per view, dim x K
  CrossViewDecomposition primary;        // run targeting view 1
  std::array<std::vector<int>, 3> alignment;
  double margin = std::numeric_limits<double>::infinity();
};

CrossViewFit fit_cross_views(const std::array<Eigen::MatrixXd, 3>& x, int k, const MixtureOptions& opts,
                             RankFailure failure) {
  const Eigen::Index n = x[0].rows();
  if (k < 1) throw InvalidConfig("number of components must be >= 1");
  // moment[v] = E[x_v x_{v+1}^T]; the three runs share them.
  const double inv_n = 1.0 / static_cast<double>(n);
  std::array<Eigen::MatrixXd, 3> moment;
  for (std::size_t v = 0; v < 3; ++v) moment[v] = x[v].transpose() * x[(v + 1) % 3] * inv_n;
  std::array<CrossViewDecomposition, 3> runs;
  for (std::size_t r = 0; r < 3; ++r) {
    const std::size_t a = (r + 1) % 3, b = (r + 2) % 3;
    PowerMethodOptions power = opts.power;
    power.seed = split_seed(split_seed(opts.seed, stream::kPowerMethod), r);
    // E[x_a x_b^T] = moment[a]; E[x_t x_a^T] = moment[r].
    runs[r] = decompose_with_moments(x[a], x[b], x[r], moment[a], moment[r], k, power, failure);
  }

  CrossViewFit fit;
  fit.primary = runs[0];
  fit.means[0] = runs[0].means;
  fit.alignment[0].resize(static_cast<std::size_t>(k));
  std::iota(fit.alignment[0].begin(), fit.alignment[0].end(), 0);

  const auto holdout = subsample_indices(n, opts.holdout, split_seed(opts.seed, stream::kHoldout));
  auto single_view_posterior = [&](int r) {
    const Eigen::MatrixXd xh = select_rows(x[static_cast<std::size_t>(r)], holdout);
    Eigen::MatrixXd lik = (xh * runs[static_cast<std::size_t>(r)].means).cwiseMax(opts.density_floor);
    const Eigen::VectorXd pri = clamp_priors(runs[static_cast<std::size_t>(r)].raw_priors, nullptr);
    for (Eigen::Index u = 0; u < lik.cols(); ++u) lik.col(u) *= pri(u);
    return std::pair{normalize_rows(std::move(lik)), pri};
  };
  const auto [q0, p0] = single_view_posterior(0);
  const double h = static_cast<double>(holdout.size());
  for (int r = 1; r < 3; ++r) {
    const auto [qr, pr] = single_view_posterior(r);
    Eigen::MatrixXd score = q0.transpose() * qr / h;
    for (int u = 0; u < k; ++u)
      for (int v = 0; v < k; ++v) score(u, v) -= std::abs(p0(u) - pr(v));
    const AssignmentResult best = best_assignment(score);
    if (k > 1 && !best.greedy) {
      const double margin = best.best - best.second;
      fit.margin = std::min(fit.margin, margin);
      if (margin < 1e-6) {
        std::ostringstream msg;
        msg << "cannot align components of view " << r + 1 << " with view 1: best matching beats the runner-up by "
            << margin;
        throw AlignmentAmbiguity(msg.str());
      }
    }
    Eigen::MatrixXd aligned(runs[static_cast<std::size_t>(r)].means.rows(), k);
    for (int u = 0; u < k; ++u) aligned.col(u) = runs[static_cast<std::size_t>(r)].means.col(best.perm[static_cast<std::size_t>(u)]);
    fit.means[static_cast<std::size_t>(r)] = std::move(aligned);
    fit.alignment[static_cast<std::size_t>(r)] = best.perm;
  }
  return fit;
}

void check_views(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2, const Eigen::MatrixXd& z3, int k) {
  if (z1.rows() == 0) throw EmptyInput("mixture fit needs at least one sample");
  if (z2.rows() != z1.rows() || z3.rows() != z1.rows() || z2.cols() != z1.cols() || z3.cols() != z1.cols())
    throw DimensionMismatch("views must have identical shapes");
  if (k < 1) throw InvalidConfig("number of components must be >= 1");
}

Eigen::MatrixXd stack_rows(std::initializer_list<const Eigen::MatrixXd*> parts) {
  Eigen::Index rows = 0;
  for (const auto* p : parts) rows += p->rows();
  Eigen::MatrixXd out(rows, (*parts.begin())->cols());
  Eigen::Index at = 0;
  for (const auto* p : parts) {
    out.middleRows(at, p->rows()) = *p;
    at += p->rows();
  }
  return out;
}

Eigen::MatrixXd one_hot(const Eigen::VectorXi& levels, int count) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(levels.size(), count);
  for (Eigen::Index i = 0; i < levels.size(); ++i) {
    const int s = levels(i);
    if (s < 0 || s >= count) {
      std::ostringstream msg;
      msg << "categorical level " << s << " outside [0, " << count << ")";
      throw DimensionMismatch(msg.str());
    }
    out(i, s) = 1.0;
  }
  return out;
}

}  // namespace

namespace {

// p_ab = E[x_a x_b^T], p_ta = E[x_t x_a^T], both precomputed by the caller.
CrossViewDecomposition decompose_with_moments(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                                              const Eigen::MatrixXd& xt, const Eigen::MatrixXd& p_ab,
                                              const Eigen::MatrixXd& p_ta, int k, const PowerMethodOptions& power,
                                              RankFailure failure) {
  const Eigen::Index n = xt.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Rank-k ranges of the helper and target feature means.
  const TruncatedSvd ab = checked_svd(p_ab, k, split_seed(power.seed, 101), failure, "cross moment E[x_a x_b^T]");
  const TruncatedSvd ta = checked_svd(p_ta, k, split_seed(power.seed, 102), failure, "cross moment E[x_t x_a^T]");
  const Eigen::MatrixXd ya = xa * ab.left;
  const Eigen::MatrixXd yb = xb * ab.right;
  const Eigen::MatrixXd yt = xt * ta.left;

  const Eigen::MatrixXd q_ab = ya.transpose() * yb * inv_n;
  const Eigen::MatrixXd q_tb = yt.transpose() * yb * inv_n;
  const Eigen::MatrixXd q_ta = yt.transpose() * ya * inv_n;

  // map_a = Q_tb Q_ab^{-1}, map_b = Q_ta Q_ba^{-1}
  const Eigen::FullPivLU<Eigen::MatrixXd> lu_ab(q_ab.transpose());
  const Eigen::FullPivLU<Eigen::MatrixXd> lu_ba(q_ab);
  if (!lu_ab.isInvertible()) throw_rank(failure, "projected cross moment is singular at k=" + std::to_string(k));
  const Eigen::MatrixXd map_a = lu_ab.solve(q_tb.transpose()).transpose();
  const Eigen::MatrixXd map_b = lu_ba.solve(q_ta.transpose()).transpose();
  const Eigen::MatrixXd sa = ya * map_a.transpose();
  const Eigen::MatrixXd sb = yb * map_b.transpose();

  const Moment2 m2 = Moment2::symmetrized(sa.transpose() * sb * inv_n, static_cast<std::size_t>(n));
  Whitener whitener;
  try {
    whitener = build_whitener(m2, k);
  } catch (const DegenerateSpectrum& e) {
    throw_rank(failure, e.what());
  }

  const SymTensor3 t = whitened_third_moment(whitener.whiten(sa), whitener.whiten(sb), whitener.whiten(yt));
  const TensorEigenSet eig = robust_power_method(t, k, power);

  CrossViewDecomposition out;
  out.lambdas = eig.lambdas;
  out.raw_priors = eig.lambdas.array().pow(-2.0).matrix();
  out.whitened_spectrum = whitener.spectrum;
  out.tensor_residual = eig.residual;
  if (k == 1) {
    // A single component's conditional mean is the marginal mean.
    out.means = xt.colwise().mean().transpose();
  } else {
    Eigen::MatrixXd projected(k, k);
    for (int u = 0; u < k; ++u) projected.col(u) = eig.lambdas(u) * whitener.unwhiten(eig.vectors.col(u));
    out.means = ta.left * projected;
  }
  return out;
}

}  // namespace

CrossViewDecomposition decompose_cross_views(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                                             const Eigen::MatrixXd& xt, int k, const PowerMethodOptions& power,
                                             RankFailure failure) {
  const Eigen::Index n = xt.rows();
  if (n == 0) throw EmptyInput("decompose_cross_views: no samples");
  if (xa.rows() != n || xb.rows() != n) throw DimensionMismatch("decompose_cross_views: sample counts differ");
  if (k < 1) throw InvalidConfig("number of components must be >= 1");
  const double inv_n = 1.0 / static_cast<double>(n);
  return decompose_with_moments(xa, xb, xt, xa.transpose() * xb * inv_n, xt.transpose() * xa * inv_n, k, power,
                                failure);
}

MixtureEstimate fit_symmetric_spectral(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                                       const Eigen::MatrixXd& z3, int k, const MixtureOptions& opts) {
  check_views(z1, z2, z3, k);
  const Eigen::Index n = z1.rows();
  const Eigen::MatrixXd pooled = stack_rows({&z1, &z2, &z3});
  const KernelSpec kernel = resolve_bandwidth(opts.kernel, pooled, n, opts.seed);

  // Anchors are the stacked first two views; subsampled beyond the budget.
  const Eigen::MatrixXd stacked = stack_rows({&z1, &z2});
  const Eigen::Index budget = 2 * static_cast<Eigen::Index>(std::max(kernel.landmark_count, 1));
  const auto rows = subsample_indices(stacked.rows(), budget, split_seed(opts.seed, stream::kAnchors));
  const AnchorBasis basis(select_rows(stacked, rows), kernel.bandwidth, kernel.jitter);

  const Eigen::MatrixXd x1 = basis.features(z1);
  const Eigen::MatrixXd x2 = basis.features(z2);
  const Eigen::MatrixXd x3 = basis.features(z3);

  // C = (1/2n)(X1^T X2 + X2^T X1); C C^T equals (1/4n^2) R L R^T in the
  // anchor coordinates, whose eigenvalues are the squared spectrum of C.
  const Eigen::MatrixXd c = (x1.transpose() * x2 + x2.transpose() * x1) / (2.0 * static_cast<double>(n));
  const Eigen::MatrixXd cc = c * c.transpose();
  Eigenpairs squared = top_k_eigh(0.5 * (cc + cc.transpose()), k);
  Eigenpairs pairs{squared.values.cwiseSqrt(), squared.vectors};
  const Whitener whitener = Whitener::from_eigenpairs(pairs);

  const SymTensor3 t = whitened_third_moment(whitener.whiten(x1), whitener.whiten(x2), whitener.whiten(x3));
  PowerMethodOptions power = opts.power;
  power.seed = split_seed(split_seed(opts.seed, stream::kPowerMethod), 0);
  const TensorEigenSet eig = robust_power_method(t, k, power);

  Eigen::MatrixXd means(basis.dim(), k);
  if (k == 1) {
    means.col(0) = (x1.colwise().mean() + x2.colwise().mean() + x3.colwise().mean()).transpose() / 3.0;
  } else {
    for (int u = 0; u < k; ++u) means.col(u) = eig.lambdas(u) * whitener.unwhiten(eig.vectors.col(u));
  }

  MixtureEstimate est;
  est.backend = MixtureBackend::kernel;
  est.lambdas = eig.lambdas;
  est.raw_priors = eig.lambdas.array().pow(-2.0).matrix();
  est.priors = clamp_priors(est.raw_priors, &est.diagnostics.clamped_priors);
  est.bandwidth = kernel.bandwidth;
  est.density_floor = opts.density_floor;
  const Eigen::MatrixXd coefficients = basis.coefficients(means);
  for (auto& view : est.views) {
    view.anchors = basis.anchors();
    view.coefficients = coefficients;
  }
  est.diagnostics.tensor_residual = eig.residual;
  est.diagnostics.whitened_spectrum = whitener.spectrum;
  est.diagnostics.anchor_jitter = basis.jitter_used();
  for (auto& a : est.diagnostics.run_alignment) {
    a.resize(static_cast<std::size_t>(k));
    std::iota(a.begin(), a.end(), 0);
  }
  return est;
}

MixtureEstimate fit_multiview(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2, const Eigen::MatrixXd& z3,
                              int k, const MixtureOptions& opts) {
  check_views(z1, z2, z3, k);
  const Eigen::Index n = z1.rows();
  const KernelSpec kernel = resolve_bandwidth(opts.kernel, stack_rows({&z1, &z2, &z3}), n, opts.seed);
  const std::array<const Eigen::MatrixXd*, 3> views{&z1, &z2, &z3};

  std::array<AnchorBasis, 3> bases;
  std::array<Eigen::MatrixXd, 3> features;
  double jitter = 0.0;
  for (std::size_t v = 0; v < 3; ++v) {
    const auto rows = subsample_indices(n, std::max(kernel.landmark_count, 1),
                                        split_seed(split_seed(opts.seed, stream::kAnchors), v));
    bases[v] = AnchorBasis(select_rows(*views[v], rows), kernel.bandwidth, kernel.jitter);
    features[v] = bases[v].features(*views[v]);
    jitter = std::max(jitter, bases[v].jitter_used());
  }

  const CrossViewFit fit = fit_cross_views(features, k, opts, RankFailure::degenerate_spectrum);

  MixtureEstimate est;
  est.backend = MixtureBackend::kernel;
  est.lambdas = fit.primary.lambdas;
  est.raw_priors = fit.primary.raw_priors;
  est.priors = clamp_priors(est.raw_priors, &est.diagnostics.clamped_priors);
  est.bandwidth = kernel.bandwidth;
  est.density_floor = opts.density_floor;
  for (std::size_t v = 0; v < 3; ++v) {
    est.views[v].anchors = bases[v].anchors();
    est.views[v].coefficients = bases[v].coefficients(fit.means[v]);
  }
  est.diagnostics.tensor_residual = fit.primary.tensor_residual;
  est.diagnostics.whitened_spectrum = fit.primary.whitened_spectrum;
  est.diagnostics.anchor_jitter = jitter;
  est.diagnostics.run_alignment = fit.alignment;
  est.diagnostics.alignment_margin = fit.margin;
  return est;
}

MixtureEstimate fit_discrete_multiview(const Eigen::VectorXi& a1, const Eigen::VectorXi& a2,
                                       const Eigen::VectorXi& a3, int levels, int k, const MixtureOptions& opts) {
  if (a1.size() == 0) throw EmptyInput("mixture fit needs at least one sample");
  if (a2.size() != a1.size() || a3.size() != a1.size()) throw DimensionMismatch("views must have equal length");
  if (k < 1) throw InvalidConfig("number of components must be >= 1");
  if (levels < k) {
    std::ostringstream msg;
    msg << "rank deficiency at k=" << k << ": views have only " << levels << " levels";
    throw RankDeficiency(msg.str());
  }
  const std::array<Eigen::MatrixXd, 3> x{one_hot(a1, levels), one_hot(a2, levels), one_hot(a3, levels)};
  const CrossViewFit fit = fit_cross_views(x, k, opts, RankFailure::rank_deficiency);

  MixtureEstimate est;
  est.backend = MixtureBackend::discrete;
  est.lambdas = fit.primary.lambdas;
  est.raw_priors = fit.primary.raw_priors;
  est.priors = clamp_priors(est.raw_priors, &est.diagnostics.clamped_priors);
  est.density_floor = opts.density_floor;
  for (std::size_t v = 0; v < 3; ++v) {
    Eigen::MatrixXd e = fit.means[v].cwiseMax(opts.density_floor);
    for (Eigen::Index u = 0; u < e.cols(); ++u) e.col(u) /= e.col(u).sum();
    est.views[v].emission = std::move(e);
  }
  est.diagnostics.tensor_residual = fit.primary.tensor_residual;
  est.diagnostics.whitened_spectrum = fit.primary.whitened_spectrum;
  est.diagnostics.run_alignment = fit.alignment;
  est.diagnostics.alignment_margin = fit.margin;
  return est;
}

Eigen::MatrixXd density_matrix(const MixtureEstimate& est, int view, const Eigen::MatrixXd& points) {
  if (!est.fitted()) throw UnfittedModel("mixture estimate has not been fitted");
  if (view < 0 || view > 2) throw DimensionMismatch("view index must be 0, 1 or 2");
  const ViewDensity& vd = est.views[static_cast<std::size_t>(view)];
  if (est.backend == MixtureBackend::kernel) {
    if (points.cols() != vd.anchors.cols()) throw DimensionMismatch("point dimension differs from the fitted view");
    return (gram(est.bandwidth, points, vd.anchors) * vd.coefficients).cwiseMax(est.density_floor);
  }
  if (points.cols() != 1) throw DimensionMismatch("categorical views take one level per row");
  Eigen::MatrixXd out(points.rows(), est.k());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double level = points(i, 0);
    if (level < 0 || level >= static_cast<double>(vd.emission.rows()) || level != std::floor(level)) {
      std::ostringstream msg;
      msg << "categorical level " << level << " outside the fitted range [0, " << vd.emission.rows() << ")";
      throw DimensionMismatch(msg.str());
    }
    out.row(i) = vd.emission.row(static_cast<Eigen::Index>(level)).cwiseMax(est.density_floor);
  }
  return out;
}

double density(const MixtureEstimate& est, int view, int component, const Eigen::RowVectorXd& z) {
  if (!est.fitted()) throw UnfittedModel("mixture estimate has not been fitted");
  if (component < 0 || component >= est.k()) throw DimensionMismatch("component index out of range");
  return density_matrix(est, view, Eigen::MatrixXd(z))(0, component);
}

PosteriorMatrix bayes_posteriors(const Eigen::VectorXd& priors, const std::array<Eigen::MatrixXd, 3>& likelihoods,
                                 double floor) {
  const Eigen::Index n = likelihoods[0].rows();
  const Eigen::Index k = priors.size();
  for (const auto& l : likelihoods)
    if (l.rows() != n || l.cols() != k) throw DimensionMismatch("likelihood matrices must be n x K");
  const double floor3 = floor * floor * floor;
  PosteriorMatrix out;
  out.flavor = PosteriorFlavor::proxy_only;
  out.weights.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    bool all_floor = true;
    double total = 0.0;
    for (Eigen::Index u = 0; u < k; ++u) {
      const double prod = likelihoods[0](i, u) * likelihoods[1](i, u) * likelihoods[2](i, u);
      if (prod > floor3 * (1.0 + 1e-9)) all_floor = false;
      out.weights(i, u) = priors(u) * prod;
      total += out.weights(i, u);
    }
    if (all_floor || !(total > 0.0) || !std::isfinite(total)) {
      out.weights.row(i) = priors.transpose() / priors.sum();
      ++out.fallback_rows;
    } else {
      out.weights.row(i) /= total;
    }
  }
  return out;
}

PosteriorMatrix posteriors(const MixtureEstimate& est, const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                           const Eigen::MatrixXd& z3) {
  if (!est.fitted()) throw UnfittedModel("mixture estimate has not been fitted");
  if (z2.rows() != z1.rows() || z3.rows() != z1.rows()) throw DimensionMismatch("views must have equal length");
  return bayes_posteriors(est.priors, {density_matrix(est, 0, z1), density_matrix(est, 1, z2), density_matrix(est, 2, z3)},
                          est.density_floor);
}

PosteriorMatrix posteriors(const MixtureEstimate& est, const Eigen::VectorXi& a1, const Eigen::VectorXi& a2,
                           const Eigen::VectorXi& a3) {
  return posteriors(est, Eigen::MatrixXd(a1.cast<double>()), Eigen::MatrixXd(a2.cast<double>()),
                    Eigen::MatrixXd(a3.cast<double>()));
}

Eigen::VectorXd scree(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2, const KernelSpec& kernel_spec, int max_k,
                      std::uint64_t seed) {
  if (z1.rows() == 0) throw EmptyInput("scree needs at least one sample");
  if (z2.rows() != z1.rows() || z2.cols() != z1.cols()) throw DimensionMismatch("views must have identical shapes");
  const Eigen::Index n = z1.rows();
  const Eigen::MatrixXd stacked = stack_rows({&z1, &z2});
  const KernelSpec kernel = resolve_bandwidth(kernel_spec, stacked, n, seed);
  const Eigen::Index budget = 2 * static_cast<Eigen::Index>(std::max(kernel.landmark_count, 1));
  const auto rows = subsample_indices(stacked.rows(), budget, split_seed(seed, stream::kAnchors));
  const AnchorBasis basis(select_rows(stacked, rows), kernel.bandwidth, kernel.jitter);
  const Eigen::MatrixXd cross = basis.features(z1).transpose() * basis.features(z2) / static_cast<double>(n);
  const int count = static_cast<int>(std::min<Eigen::Index>(std::max(max_k, 1), cross.rows()));
  return top_k_svd(cross, count, split_seed(seed, stream::kPowerMethod)).values;
}

Eigen::VectorXd discrete_scree(const Eigen::VectorXi& a1, const Eigen::VectorXi& a2, int levels, int max_k) {
  if (a1.size() == 0) throw EmptyInput("scree needs at least one sample");
  if (a2.size() != a1.size()) throw DimensionMismatch("views must have equal length");
  const Eigen::MatrixXd cross = one_hot(a1, levels).transpose() * one_hot(a2, levels) / static_cast<double>(a1.size());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  const Eigen::Index count = std::min<Eigen::Index>(std::max(max_k, 1), svd.singularValues().size());
  return svd.singularValues().head(count);
}

int select_rank(const Eigen::VectorXd& values, Eigen::Index n) {
  if (values.size() < 2) return 1;
  const double noise = values(0) / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1)));
  int best = 0;
  double best_ratio = -1.0;
  for (Eigen::Index j = 0; j + 1 < values.size(); ++j) {
    if (j > 0 && values(j) < noise) break;
    const double next = values(j + 1);
    const double ratio = next > 0.0 ? values(j) / next : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<int>(j);
    }
  }
  return best + 1;
}

Alignment align_permutation(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& reference) {
  if (estimated.rows() != reference.rows() || estimated.cols() != reference.cols())
    throw DimensionMismatch("align_permutation: summaries must have the same shape");
  const Eigen::Index k = reference.rows();
  Eigen::MatrixXd score(k, k);
  for (Eigen::Index u = 0; u < k; ++u)
    for (Eigen::Index v = 0; v < k; ++v) score(u, v) = -(reference.row(u) - estimated.row(v)).norm();
  const AssignmentResult best = best_assignment(score);
  return Alignment{best.perm, -best.best, best.greedy};
}

MixtureEstimate permute(const MixtureEstimate& est, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != est.k()) throw DimensionMismatch("permutation length differs from K");
  MixtureEstimate out = est;
  for (std::size_t u = 0; u < perm.size(); ++u) {
    const auto src = static_cast<Eigen::Index>(perm[u]);
    const auto dst = static_cast<Eigen::Index>(u);
    out.priors(dst) = est.priors(src);
    out.raw_priors(dst) = est.raw_priors(src);
    out.lambdas(dst) = est.lambdas(src);
    for (std::size_t v = 0; v < 3; ++v) {
      if (est.views[v].coefficients.size() > 0) out.views[v].coefficients.col(dst) = est.views[v].coefficients.col(src);
      if (est.views[v].emission.size() > 0) out.views[v].emission.col(dst) = est.views[v].emission.col(src);
    }
  }
  return out;
}

PosteriorMatrix permute(const PosteriorMatrix& p, const std::vector<int>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != p.weights.cols()) throw DimensionMismatch("permutation length differs from K");
  PosteriorMatrix out = p;
  for (std::size_t u = 0; u < perm.size(); ++u) out.weights.col(static_cast<Eigen::Index>(u)) = p.weights.col(perm[u]);
  return out;
}

std::vector<int> map_assign(const PosteriorMatrix& p) {
  std::vector<int> labels(static_cast<std::size_t>(p.weights.rows()));
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index u = 1; u < p.weights.cols(); ++u)
      if (p.weights(i, u) > p.weights(i, best)) best = u;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace tensorcate
