#pragma once

// Dense symmetric moment algebra: truncated eigendecomposition, whitening,
// whitened third moments and the robust tensor power method with deflation.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace tensorcate {

/// Symmetric second-order moment matrix together with the sample count that
/// produced it.
struct Moment2 {
  Eigen::MatrixXd matrix;
  std::size_t n_samples = 0;

  /// Symmetrizes `m` as (m + m^T) / 2 before storing it.
  static Moment2 symmetrized(const Eigen::MatrixXd& m, std::size_t n);
};

struct Eigenpairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Relative eigenvalue floor used when no explicit floor is given.
inline constexpr double kRelativeEigenFloor = 1e-10;

/// Leading k eigenpairs of a symmetric matrix. Throws DegenerateSpectrum when
/// the k-th eigenvalue is below `floor`.
Eigenpairs top_k_eigh(const Eigen::MatrixXd& m, int k, double floor);
/// Same, with floor = kRelativeEigenFloor * largest eigenvalue.
Eigenpairs top_k_eigh(const Eigen::MatrixXd& m, int k);
inline Eigenpairs top_k_eigh(const Moment2& m2, int k) { return top_k_eigh(m2.matrix, k); }

struct TruncatedSvd {
  Eigen::VectorXd values;  // descending
  Eigen::MatrixXd left;    // rows(m) x k
  Eigen::MatrixXd right;   // cols(m) x k
};

/// Leading k singular triplets. Small matrices use a dense divide-and-conquer
/// SVD; large ones a seeded randomized subspace iteration with oversampling.
TruncatedSvd top_k_svd(const Eigen::MatrixXd& m, int k, std::uint64_t seed);

/// Linear map W (m x K) with W^T M W = I_K.
struct Whitener {
  Eigen::MatrixXd map;
  Eigen::VectorXd spectrum;  // eigenvalues of M kept by the map, descending

  int rank() const { return static_cast<int>(spectrum.size()); }

  /// Rows of `x` are points in the original coordinates; returns x W.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& x) const { return x * map; }

  /// Pseudo-inverse of W^T applied to a whitened vector: U S^{1/2} v.
  Eigen::VectorXd unwhiten(const Eigen::VectorXd& v) const {
    return map * (spectrum.asDiagonal() * v);
  }

  /// Builds U S^{-1/2} from eigenpairs of the moment being whitened.
  static Whitener from_eigenpairs(const Eigenpairs& pairs);
};

Whitener build_whitener(const Moment2& m2, int k);

/// Dense K x K x K tensor, intended to be symmetric.
class SymTensor3 {
 public:
  SymTensor3() = default;
  explicit SymTensor3(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }

  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  double frobenius_norm() const;

  /// Largest deviation across all six index orderings, relative to the
  /// largest entry (absolute when the tensor is zero).
  double asymmetry() const;

  /// Adds `scale * v (x) v (x) v`.
  void add_rank_one(double scale, const Eigen::VectorXd& v);

  /// Sum of lambda_j v_j^{(x)3} over the columns of `vectors`.
  static SymTensor3 from_components(const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& vectors);

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }

  int dim_ = 0;
  std::vector<double> data_;
};

/// Empirical third moment of whitened triples, averaged over all six index
/// orderings of each sample so the result is exactly symmetric. Row s of
/// x1, x2, x3 is one sample.
SymTensor3 whitened_third_moment(const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2,
                                 const Eigen::MatrixXd& x3);

/// T(I, v, v).
Eigen::VectorXd tensor_contract(const SymTensor3& t, const Eigen::VectorXd& v);

/// T(v, v, v).
double tensor_form(const SymTensor3& t, const Eigen::VectorXd& v);

struct PowerMethodOptions {
  int restarts = 50;
  int iterations = 200;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

struct TensorEigenSet {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd vectors;  // one unit column per component
  double residual = 0.0;    // ||T - sum lambda_j v_j^{(x)3}||_F
};

/// Robust tensor power method: for each of k components, run `restarts`
/// random starts, keep the converged one with the largest eigenvalue, polish
/// it with a further `iterations` steps and deflate.
TensorEigenSet robust_power_method(const SymTensor3& t, int k, const PowerMethodOptions& opts = {});

}  // namespace tensorcate
