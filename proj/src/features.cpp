#include "tensorcate/features.hpp"

#include "tensorcate/errors.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace tensorcate {

namespace {

int parse_int(std::string_view text, const std::string& term) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw InvalidConfig("cannot parse feature term '" + term + "'");
  return value;
}

FeatureFactor parse_factor(std::string_view f, const std::string& term) {
  FeatureFactor out;
  if (f == "a") return out;
  if (f.size() == 2 && f[0] == 'a') {
    out.source = FeatureFactor::Source::categorical;
    out.view = parse_int(f.substr(1), term) - 1;
    if (out.view < 0 || out.view > 2) throw InvalidConfig("treatment index out of range in '" + term + "'");
    return out;
  }
  if (f.size() >= 4 && f[0] == 'z' && f[2] == '_') {
    out.source = FeatureFactor::Source::proxy;
    out.view = parse_int(f.substr(1, 1), term) - 1;
    out.coord = parse_int(f.substr(3), term);
    if (out.view < 0 || out.view > 2 || out.coord < 0) throw InvalidConfig("proxy index out of range in '" + term + "'");
    return out;
  }
  throw InvalidConfig("unknown factor '" + std::string(f) + "' in feature term '" + term + "'");
}

std::string proxy_name(int view, int coord) { return "z" + std::to_string(view) + "_" + std::to_string(coord); }

void append_views(std::vector<std::string>& names, const std::vector<int>& views, int d) {
  for (int v : views)
    for (int j = 0; j < d; ++j) names.push_back(proxy_name(v, j));
}

template <typename Value>
Eigen::MatrixXd build(const std::vector<FeatureTerm>& terms, Eigen::Index n, Value value) {
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(terms.size()));
  for (std::size_t m = 0; m < terms.size(); ++m) {
    const auto col = static_cast<Eigen::Index>(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      double prod = 1.0;
      for (const auto& f : terms[m].factors) prod *= value(f, i);
      out(i, col) = prod;
    }
  }
  return out;
}

}  // namespace

FeatureTerm parse_feature_term(const std::string& name) {
  FeatureTerm term;
  term.name = name;
  if (name == "1") return term;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t stop = std::min(name.find('*', start), name.size());
    term.factors.push_back(parse_factor(std::string_view(name).substr(start, stop - start), name));
    start = stop + 1;
  }
  return term;
}

int FeatureTerm::treatment_power() const {
  return static_cast<int>(std::count_if(factors.begin(), factors.end(),
                                        [](const FeatureFactor& f) { return f.source == FeatureFactor::Source::treatment; }));
}

FeatureMap::FeatureMap(std::string kind, const std::vector<std::string>& names) : kind_(std::move(kind)) {
  if (names.empty()) throw InvalidConfig("feature map needs at least one term");
  for (const auto& n : names) terms_.push_back(parse_feature_term(n));
}

FeatureMap FeatureMap::constant_plus_linear_z(const std::vector<int>& views, int d) {
  std::vector<std::string> names{"1"};
  append_views(names, views, d);
  return FeatureMap("constant_plus_linear_z", names);
}

FeatureMap FeatureMap::linear_z(const std::vector<int>& views, int d) {
  std::vector<std::string> names;
  append_views(names, views, d);
  return FeatureMap("linear_z", names);
}

FeatureMap FeatureMap::constant_treat_linear(const std::vector<int>& views, int d) {
  std::vector<std::string> names{"1", "a"};
  append_views(names, views, d);
  return FeatureMap("constant_treat_linear", names);
}

FeatureMap FeatureMap::treatments_linear() { return FeatureMap("treatments_linear", {"1", "a1", "a2", "a3"}); }

std::vector<std::string> FeatureMap::names() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) out.push_back(t.name);
  return out;
}

int FeatureMap::required_proxy_dim() const {
  int d = 0;
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      if (f.source == FeatureFactor::Source::proxy) d = std::max(d, f.coord + 1);
  return d;
}

bool FeatureMap::uses_categorical() const {
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      if (f.source == FeatureFactor::Source::categorical) return true;
  return false;
}

bool FeatureMap::uses_treatment() const {
  for (const auto& t : terms_)
    if (t.treatment_power() > 0) return true;
  return false;
}

Eigen::MatrixXd FeatureMap::design(const MultiProxyData& data) const {
  if (uses_categorical()) throw InvalidConfig("feature map uses categorical treatments on proxy data");
  if (required_proxy_dim() > data.dim()) throw DimensionMismatch("feature map references a missing proxy coordinate");
  return build(terms_, data.size(), [&](const FeatureFactor& f, Eigen::Index i) {
    return f.source == FeatureFactor::Source::treatment ? data.a(i) : data.z[static_cast<std::size_t>(f.view)](i, f.coord);
  });
}

Eigen::MatrixXd FeatureMap::design_at(const MultiProxyData& data, double a) const {
  if (uses_categorical()) throw InvalidConfig("feature map uses categorical treatments on proxy data");
  if (required_proxy_dim() > data.dim()) throw DimensionMismatch("feature map references a missing proxy coordinate");
  return build(terms_, data.z[0].rows(), [&](const FeatureFactor& f, Eigen::Index i) {
    return f.source == FeatureFactor::Source::treatment ? a : data.z[static_cast<std::size_t>(f.view)](i, f.coord);
  });
}

Eigen::MatrixXd FeatureMap::design(const MultiTreatmentData& data) const {
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      if (f.source != FeatureFactor::Source::categorical)
        throw InvalidConfig("feature term '" + t.name + "' is not available for multi-treatment data");
  return build(terms_, data.size(), [&](const FeatureFactor& f, Eigen::Index i) {
    return static_cast<double>(data.a[static_cast<std::size_t>(f.view)](i));
  });
}

Eigen::VectorXd FeatureMap::evaluate(double a, const std::array<double, 3>& treatments,
                                     const std::array<Eigen::RowVectorXd, 3>& z) const {
  Eigen::VectorXd out(output_dim());
  for (std::size_t m = 0; m < terms_.size(); ++m) {
    double prod = 1.0;
    for (const auto& f : terms_[m].factors) {
      switch (f.source) {
        case FeatureFactor::Source::treatment: prod *= a; break;
        case FeatureFactor::Source::categorical: prod *= treatments[static_cast<std::size_t>(f.view)]; break;
        case FeatureFactor::Source::proxy: {
          const auto& row = z[static_cast<std::size_t>(f.view)];
          if (f.coord >= row.size()) {
            std::ostringstream msg;
            msg << "feature term '" << terms_[m].name << "' needs coordinate " << f.coord << " of view " << f.view + 1;
            throw DimensionMismatch(msg.str());
          }
          prod *= row(f.coord);
          break;
        }
      }
    }
    out(static_cast<Eigen::Index>(m)) = prod;
  }
  return out;
}

}  // namespace tensorcate
