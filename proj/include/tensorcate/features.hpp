#pragma once

// Basis expansions for the treatment, outcome and multi-treatment models.
// A map is a list of terms; each term is a product of factors named
//   "1"            constant
//   "a"            the scalar treatment
//   "a1".."a3"     categorical treatments (as numbers)
//   "z<v>_<j>"     coordinate j of proxy view v (v = 1..3)
// joined by '*', e.g. "a*z1_2".

#include "tensorcate/dataset.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace tensorcate {

struct FeatureFactor {
  enum class Source { treatment, categorical, proxy };
  Source source = Source::treatment;
  int view = 0;   // categorical: 0..2; proxy: 0..2
  int coord = 0;  // proxy coordinate
};

struct FeatureTerm {
  std::string name;
  std::vector<FeatureFactor> factors;  // empty for the constant

  /// Number of "a" factors; the term is a^power * g(z).
  int treatment_power() const;
};

class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::string kind, const std::vector<std::string>& names);

  /// [1, z_v coordinates for each listed view]
  static FeatureMap constant_plus_linear_z(const std::vector<int>& views, int d);
  /// z_v coordinates only, no intercept.
  static FeatureMap linear_z(const std::vector<int>& views, int d);
  /// [1, a, z_v coordinates for each listed view]
  static FeatureMap constant_treat_linear(const std::vector<int>& views, int d);
  /// [1, a1, a2, a3]
  static FeatureMap treatments_linear();
  static FeatureMap custom(const std::vector<std::string>& names) { return FeatureMap("custom", names); }

  const std::string& kind() const { return kind_; }
  const std::vector<FeatureTerm>& terms() const { return terms_; }
  std::vector<std::string> names() const;
  int output_dim() const { return static_cast<int>(terms_.size()); }

  /// Largest proxy dimension referenced (0 if none).
  int required_proxy_dim() const;
  bool uses_categorical() const;
  bool uses_treatment() const;

  /// n x output_dim design matrix.
  Eigen::MatrixXd design(const MultiProxyData& data) const;
  /// Same with the treatment set to `a` for every row.
  Eigen::MatrixXd design_at(const MultiProxyData& data, double a) const;
  Eigen::MatrixXd design(const MultiTreatmentData& data) const;

  /// One evaluation. `z` holds one row per view (may be empty if unused).
  Eigen::VectorXd evaluate(double a, const std::array<double, 3>& treatments,
                           const std::array<Eigen::RowVectorXd, 3>& z) const;

 private:
  std::string kind_ = "custom";
  std::vector<FeatureTerm> terms_;
};

FeatureTerm parse_feature_term(const std::string& name);

}  // namespace tensorcate
