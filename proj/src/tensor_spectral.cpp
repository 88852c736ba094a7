#include "tensorcate/tensor_spectral.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace tensorcate {

Moment2 Moment2::symmetrized(const Eigen::MatrixXd& m, std::size_t n) {
  if (m.rows() != m.cols()) throw DimensionMismatch("second moment must be square");
  Moment2 out;
  out.matrix = 0.5 * (m + m.transpose());
  out.n_samples = n;
  return out;
}

Eigenpairs top_k_eigh(const Eigen::MatrixXd& m, int k, double floor) {
  if (m.rows() != m.cols()) throw DimensionMismatch("top_k_eigh: matrix must be square");
  if (k < 1 || k > m.rows()) {
    std::ostringstream msg;
    msg << "degenerate spectrum at k=" << k << ": matrix has dimension " << m.rows();
    throw DegenerateSpectrum(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw NonConvergence("symmetric eigensolver failed");

  // Eigen returns ascending order.
  const Eigen::Index dim = m.rows();
  Eigenpairs out;
  out.values.resize(k);
  out.vectors.resize(dim, k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = solver.eigenvalues()(dim - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(dim - 1 - j);
  }
  if (!(out.values(k - 1) >= floor) || !(out.values(k - 1) > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate spectrum at k=" << k << ": eigenvalue " << out.values(k - 1)
        << " below floor " << floor;
    throw DegenerateSpectrum(msg.str());
  }
  return out;
}

Eigenpairs top_k_eigh(const Eigen::MatrixXd& m, int k) {
  if (m.rows() == 0) throw DegenerateSpectrum("degenerate spectrum at k=" + std::to_string(k) + ": empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> probe(m, Eigen::EigenvaluesOnly);
  const double largest = probe.eigenvalues().maxCoeff();
  return top_k_eigh(m, k, kRelativeEigenFloor * std::max(largest, 0.0));
}

TruncatedSvd top_k_svd(const Eigen::MatrixXd& m, int k, std::uint64_t seed) {
  const Eigen::Index small = std::min(m.rows(), m.cols());
  if (k < 1 || k > small) {
    std::ostringstream msg;
    msg << "degenerate spectrum at k=" << k << ": matrix is " << m.rows() << "x" << m.cols();
    throw DegenerateSpectrum(msg.str());
  }
  TruncatedSvd out;
  constexpr Eigen::Index kDenseLimit = 256;
  if (small <= kDenseLimit) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.values = svd.singularValues().head(k);
    out.left = svd.matrixU().leftCols(k);
    out.right = svd.matrixV().leftCols(k);
    return out;
  }

  // Randomized range finder with subspace iteration.
  constexpr int kOversample = 10;
  constexpr int kPowerSteps = 6;
  const Eigen::Index width = std::min<Eigen::Index>(small, k + kOversample);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd probe(m.cols(), width);
  for (Eigen::Index j = 0; j < width; ++j)
    for (Eigen::Index i = 0; i < m.cols(); ++i) probe(i, j) = gauss(rng);

  auto orthonormalize = [](const Eigen::MatrixXd& a) -> Eigen::MatrixXd {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  };
  Eigen::MatrixXd q = orthonormalize(m * probe);
  for (int step = 0; step < kPowerSteps; ++step) {
    const Eigen::MatrixXd qt = orthonormalize(m.transpose() * q);
    q = orthonormalize(m * qt);
  }
  const Eigen::MatrixXd reduced = q.transpose() * m;  // width x cols
  Eigen::BDCSVD<Eigen::MatrixXd> svd(reduced, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.values = svd.singularValues().head(k);
  out.left = q * svd.matrixU().leftCols(k);
  out.right = svd.matrixV().leftCols(k);
  return out;
}

Whitener Whitener::from_eigenpairs(const Eigenpairs& pairs) {
  Whitener w;
  w.spectrum = pairs.values;
  w.map = pairs.vectors * pairs.values.cwiseSqrt().cwiseInverse().asDiagonal();
  return w;
}

Whitener build_whitener(const Moment2& m2, int k) {
  return Whitener::from_eigenpairs(top_k_eigh(m2.matrix, k));
}

double SymTensor3::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double SymTensor3::asymmetry() const {
  double largest = 0.0;
  for (double x : data_) largest = std::max(largest, std::abs(x));
  double worst = 0.0;
  const SymTensor3& t = *this;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) {
        const double v = t(i, j, k);
        const std::array<double, 5> others{t(i, k, j), t(j, i, k), t(j, k, i), t(k, i, j), t(k, j, i)};
        for (double o : others) worst = std::max(worst, std::abs(v - o));
      }
  return largest > 0.0 ? worst / largest : worst;
}

void SymTensor3::add_rank_one(double scale, const Eigen::VectorXd& v) {
  if (v.size() != dim_) throw DimensionMismatch("add_rank_one: vector length differs from tensor dimension");
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      const double sij = scale * v(i) * v(j);
      for (int k = 0; k < dim_; ++k) (*this)(i, j, k) += sij * v(k);
    }
}

SymTensor3 SymTensor3::from_components(const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& vectors) {
  if (lambdas.size() != vectors.cols()) throw DimensionMismatch("from_components: one lambda per column");
  SymTensor3 t(static_cast<int>(vectors.rows()));
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) t.add_rank_one(lambdas(j), vectors.col(j));
  return t;
}

SymTensor3 whitened_third_moment(const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2,
                                 const Eigen::MatrixXd& x3) {
  const Eigen::Index n = x1.rows();
  if (n == 0) throw EmptyInput("whitened_third_moment: no samples");
  if (x2.rows() != n || x3.rows() != n) throw DimensionMismatch("whitened_third_moment: sample counts differ");
  const Eigen::Index k = x1.cols();
  if (x2.cols() != k || x3.cols() != k) throw DimensionMismatch("whitened_third_moment: widths differ");

  // raw(i,j,:) = (1/n) sum_s x1(s,i) x2(s,j) x3(s,:)
  const int dim = static_cast<int>(k);
  SymTensor3 raw(dim);
  Eigen::VectorXd prod(n);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      prod = x1.col(i).cwiseProduct(x2.col(j));
      const Eigen::VectorXd slice = x3.transpose() * prod;
      for (int l = 0; l < dim; ++l) raw(i, j, l) = slice(l) / static_cast<double>(n);
    }

  SymTensor3 out(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int l = 0; l < dim; ++l)
        out(i, j, l) = (raw(i, j, l) + raw(i, l, j) + raw(j, i, l) + raw(j, l, i) + raw(l, i, j) +
                        raw(l, j, i)) /
                       6.0;
  return out;
}

Eigen::VectorXd tensor_contract(const SymTensor3& t, const Eigen::VectorXd& v) {
  const int dim = t.dim();
  if (v.size() != dim) throw DimensionMismatch("tensor_contract: vector length differs from tensor dimension");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) {
      double inner = 0.0;
      for (int k = 0; k < dim; ++k) inner += t(i, j, k) * v(k);
      s += inner * v(j);
    }
    out(i) = s;
  }
  return out;
}

double tensor_form(const SymTensor3& t, const Eigen::VectorXd& v) { return tensor_contract(t, v).dot(v); }

namespace {

struct PowerRun {
  Eigen::VectorXd v;
  double lambda = 0.0;
  bool converged = false;
};

// Iterates v <- T(I,v,v)/||T(I,v,v)||. Convergence is measured up to sign,
// since a negative eigenvalue makes the raw iterates alternate.
PowerRun power_iterate(const SymTensor3& t, Eigen::VectorXd v, int iterations, double tol) {
  PowerRun run;
  for (int s = 0; s < iterations; ++s) {
    Eigen::VectorXd w = tensor_contract(t, v);
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    w /= norm;
    const double step = std::min((w - v).norm(), (w + v).norm());
    v = std::move(w);
    if (step < tol) {
      run.converged = true;
      break;
    }
  }
  run.lambda = tensor_form(t, v);
  if (run.lambda < 0.0) {
    run.lambda = -run.lambda;
    v = -v;
  }
  run.v = std::move(v);
  return run;
}

}  // namespace

TensorEigenSet robust_power_method(const SymTensor3& t, int k, const PowerMethodOptions& opts) {
  const int dim = t.dim();
  if (k < 1 || k > dim) throw DimensionMismatch("robust_power_method: need 1 <= k <= tensor dimension");
  if (opts.restarts < 1 || opts.iterations < 1) throw InvalidConfig("robust_power_method: restarts and iterations must be >= 1");

  TensorEigenSet out;
  out.lambdas.resize(k);
  out.vectors.resize(dim, k);
  SymTensor3 deflated = t;

  for (int comp = 0; comp < k; ++comp) {
    PowerRun best;
    bool have_best = false;
    for (int r = 0; r < opts.restarts; ++r) {
      Rng rng = make_rng(split_seed(opts.seed, static_cast<std::uint64_t>(comp)), static_cast<std::uint64_t>(r));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::VectorXd v0(dim);
      for (int i = 0; i < dim; ++i) v0(i) = gauss(rng);
      v0.normalize();
      PowerRun run = power_iterate(deflated, v0, opts.iterations, opts.tol);
      if (!run.converged) continue;
      if (!have_best || run.lambda > best.lambda) {
        best = std::move(run);
        have_best = true;
      }
    }
    if (!have_best) {
      std::ostringstream msg;
      msg << "tensor power method did not converge for component " << comp + 1 << " in any of "
          << opts.restarts << " restarts";
      throw NonConvergence(msg.str());
    }
    PowerRun polished = power_iterate(deflated, best.v, opts.iterations, opts.tol);
    out.lambdas(comp) = polished.lambda;
    out.vectors.col(comp) = polished.v;
    deflated.add_rank_one(-polished.lambda, polished.v);
  }
  out.residual = deflated.frobenius_norm();
  return out;
}

}  // namespace tensorcate
