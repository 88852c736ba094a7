#include "tensorcate/regression.hpp"

#include "tensorcate/errors.hpp"

#include <sstream>

namespace tensorcate {

StackedSolution solve_stacked(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, const Eigen::VectorXd& y,
                              double ridge) {
  const Eigen::Index n = x.rows(), p = x.cols(), k = w.cols();
  if (n == 0) throw EmptyInput("regression needs at least one row");
  if (w.rows() != n || y.size() != n) throw DimensionMismatch("regression inputs have different row counts");
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd gram(k * p, k * p);
  Eigen::VectorXd rhs(k * p);
  for (Eigen::Index u = 0; u < k; ++u) {
    rhs.segment(u * p, p) = x.transpose() * (w.col(u).cwiseProduct(y)) * inv_n;
    for (Eigen::Index v = u; v < k; ++v) {
      const Eigen::VectorXd ww = w.col(u).cwiseProduct(w.col(v));
      const Eigen::MatrixXd block = x.transpose() * (x.array().colwise() * ww.array()).matrix() * inv_n;
      gram.block(u * p, v * p, p, p) = block;
      gram.block(v * p, u * p, p, p) = block.transpose();
    }
  }

  std::vector<double> rungs{ridge};
  for (double r : kRidgeLadder)
    if (r > ridge) rungs.push_back(r);
  double last_rcond = 0.0;
  for (double rung : rungs) {
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += rung;
    const Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() == Eigen::Success) {
      last_rcond = llt.rcond();
      if (last_rcond >= kSingularRcond) {
        const Eigen::VectorXd b = llt.solve(rhs);
        StackedSolution out;
        out.coef = Eigen::Map<const Eigen::MatrixXd>(b.data(), p, k).transpose();
        out.ridge = rung;
        out.escalated = rung > ridge;
        return out;
      }
    }
  }
  std::ostringstream msg;
  msg << "singular normal equations (" << k * p << " unknowns) even with ridge " << rungs.back()
      << "; reciprocal condition " << last_rcond;
  throw SingularSystem(msg.str());
}

}  // namespace tensorcate
