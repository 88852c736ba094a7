#pragma once

// Recovery of a K-component mixture from three conditionally independent
// views: priors plus one density per (view, component), and the Bayes
// posteriors built from them.

#include "tensorcate/kernel.hpp"
#include "tensorcate/tensor_spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tensorcate {

enum class MixtureBackend { kernel, discrete };

std::string to_string(MixtureBackend backend);

/// Density representation for one view.
/// kernel:   f_u(z) = max(sum_j coefficients(j, u) k(anchors_j, z), floor)
/// discrete: f_u(s) = emission(s, u)
struct ViewDensity {
  Eigen::MatrixXd anchors;       // m x d
  Eigen::MatrixXd coefficients;  // m x K
  Eigen::MatrixXd emission;      // S x K, column-stochastic
};

struct MixtureDiagnostics {
  double tensor_residual = 0.0;
  Eigen::VectorXd whitened_spectrum;
  double anchor_jitter = 0.0;
  /// Permutation applied to each cross-view run to match the first run.
  std::array<std::vector<int>, 3> run_alignment;
  double alignment_margin = 0.0;
  int clamped_priors = 0;
};

struct MixtureEstimate {
  MixtureBackend backend = MixtureBackend::kernel;
  Eigen::VectorXd priors;      // clamped to [1e-6, 1] and renormalized
  Eigen::VectorXd raw_priors;  // lambda^-2, before clamping
  Eigen::VectorXd lambdas;
  std::array<ViewDensity, 3> views;
  double bandwidth = 0.0;  // kernel backend only
  double density_floor = 1e-12;
  MixtureDiagnostics diagnostics;

  int k() const { return static_cast<int>(priors.size()); }
  bool fitted() const { return priors.size() > 0; }
};

enum class PosteriorFlavor { proxy_only, treatment_updated };

struct PosteriorMatrix {
  Eigen::MatrixXd weights;  // n x K, rows sum to one
  PosteriorFlavor flavor = PosteriorFlavor::proxy_only;
  int fallback_rows = 0;  // rows whose likelihood underflowed
};

inline constexpr double kPriorFloor = 1e-6;
inline constexpr double kDefaultDensityFloor = 1e-12;

struct MixtureOptions {
  KernelSpec kernel;
  PowerMethodOptions power;
  std::uint64_t seed = 0;
  double density_floor = kDefaultDensityFloor;
  int holdout = 1000;  // points used to align cross-view runs
};

/// Kernel spectral method for exchangeable views: the three views share one
/// conditional distribution per component.
MixtureEstimate fit_symmetric_spectral(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                                       const Eigen::MatrixXd& z3, int k, const MixtureOptions& opts);

/// Kernel method for views with view-specific component distributions. Each
/// view in turn is the decomposition target; the three runs are aligned by
/// prior similarity and co-membership of their single-view posteriors.
MixtureEstimate fit_multiview(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                              const Eigen::MatrixXd& z3, int k, const MixtureOptions& opts);

/// Categorical views with levels 0..levels-1, one-hot encoded.
MixtureEstimate fit_discrete_multiview(const Eigen::VectorXi& a1, const Eigen::VectorXi& a2,
                                       const Eigen::VectorXi& a3, int levels, int k,
                                       const MixtureOptions& opts);

/// Result of decomposing one target view against two helper views.
struct CrossViewDecomposition {
  Eigen::VectorXd lambdas;
  Eigen::VectorXd raw_priors;  // lambda^-2
  Eigen::MatrixXd means;       // dim(target) x K conditional means
  Eigen::VectorXd whitened_spectrum;
  double tensor_residual = 0.0;
};

enum class RankFailure { degenerate_spectrum, rank_deficiency };

/// Conditional means of the target view's features and the mixture priors
/// from features of two helper views (rows are samples). The helpers are
/// mapped into the target's coordinates with E[x_t x_b^T] E[x_a x_b^T]^+ x_a
/// (rank-k pseudo-inverses) before whitening and tensor decomposition.
CrossViewDecomposition decompose_cross_views(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                                             const Eigen::MatrixXd& xt, int k,
                                             const PowerMethodOptions& power, RankFailure failure);

/// Density of component `component` in view `view` at point `z` (a row).
double density(const MixtureEstimate& est, int view, int component, const Eigen::RowVectorXd& z);

/// n x K matrix of floored densities for one view. For the discrete backend
/// `points` is a single column of integer levels.
Eigen::MatrixXd density_matrix(const MixtureEstimate& est, int view, const Eigen::MatrixXd& points);

/// Bayes rule over already-evaluated per-view likelihoods (each n x K,
/// floored). Rows where every component sits at floor^3 fall back to the
/// priors and are counted.
PosteriorMatrix bayes_posteriors(const Eigen::VectorXd& priors, const std::array<Eigen::MatrixXd, 3>& likelihoods,
                                 double floor);

PosteriorMatrix posteriors(const MixtureEstimate& est, const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                           const Eigen::MatrixXd& z3);

/// Posteriors for categorical views.
PosteriorMatrix posteriors(const MixtureEstimate& est, const Eigen::VectorXi& a1, const Eigen::VectorXi& a2,
                           const Eigen::VectorXi& a3);

/// Leading singular values of the empirical cross-covariance between two
/// views, computed in anchor coordinates. At most max_k values.
Eigen::VectorXd scree(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2, const KernelSpec& kernel, int max_k,
                      std::uint64_t seed);

/// Same for categorical views (one-hot cross-moment).
Eigen::VectorXd discrete_scree(const Eigen::VectorXi& a1, const Eigen::VectorXi& a2, int levels, int max_k);

/// Spectral-gap choice of K: argmax_j s_j / s_{j+1} (1-based) over the values
/// that stand above the sampling noise scale s_1 / sqrt(n).
int select_rank(const Eigen::VectorXd& values, Eigen::Index n);

struct Alignment {
  std::vector<int> perm;  // aligned component u is estimated component perm[u]
  double cost = 0.0;
  bool greedy = false;  // K > 8: exhaustive search skipped
};

inline constexpr int kMaxExhaustiveK = 8;

/// Matches estimated components (rows of `estimated`) to reference rows by
/// minimizing the summed L2 distance. Exhaustive for K <= 8, greedy beyond.
Alignment align_permutation(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& reference);

/// Reorders every component-indexed field so that new component u is old
/// component perm[u].
MixtureEstimate permute(const MixtureEstimate& est, const std::vector<int>& perm);
PosteriorMatrix permute(const PosteriorMatrix& p, const std::vector<int>& perm);

/// argmax per row, ties to the smallest index. Labels are 0-based.
std::vector<int> map_assign(const PosteriorMatrix& p);

}  // namespace tensorcate
