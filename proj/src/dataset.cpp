#include "tensorcate/dataset.hpp"

#include "tensorcate/errors.hpp"

#include <cmath>
#include <string>

namespace tensorcate {

void MultiProxyData::validate() const {
  const Eigen::Index n = a.size();
  if (y.size() != n) throw DimensionMismatch("treatment and outcome lengths differ");
  for (int v = 0; v < 3; ++v) {
    if (z[v].rows() != n) throw DimensionMismatch("proxy view " + std::to_string(v + 1) + " has the wrong row count");
    if (z[v].cols() != z[0].cols()) throw DimensionMismatch("proxy views have different dimensions");
  }
}

void MultiTreatmentData::validate() const {
  const Eigen::Index n = y.size();
  if (levels < 1) throw InvalidConfig("categorical treatments need at least one level");
  for (int v = 0; v < 3; ++v) {
    if (a[v].size() != n) throw DimensionMismatch("treatment " + std::to_string(v + 1) + " has the wrong length");
    for (Eigen::Index i = 0; i < n; ++i)
      if (a[v](i) < 0 || a[v](i) >= levels)
        throw DimensionMismatch("treatment " + std::to_string(v + 1) + " level " + std::to_string(a[v](i)) +
                                " outside [0, " + std::to_string(levels) + ")");
  }
}

}  // namespace tensorcate
