#include "tensorcate/io.hpp"

#include "tensorcate/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tensorcate {

using nlohmann::json;

std::string to_string(Mode mode) { return mode == Mode::multiproxy ? "multiproxy" : "multitreatment"; }

Mode mode_from_string(const std::string& name) {
  if (name == "multiproxy") return Mode::multiproxy;
  if (name == "multitreatment") return Mode::multitreatment;
  throw InvalidConfig("unknown mode '" + name + "' (expected multiproxy or multitreatment)");
}

namespace {

// ---- text helpers ---------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = line.find(sep, start);
    out.push_back(line.substr(start, stop == std::string::npos ? std::string::npos : stop - start));
    if (stop == std::string::npos) return out;
    start = stop + 1;
  }
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& cell, std::size_t row) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "row " << row << ": '" << cell << "' is not a finite number";
    throw SchemaError(msg.str());
  }
  return value;
}

std::vector<std::vector<double>> parse_rows(const std::vector<std::string>& lines, std::size_t cols) {
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != cols) {
      std::ostringstream msg;
      msg << "row " << r << " has " << cells.size() << " fields, expected " << cols;
      throw SchemaError(msg.str());
    }
    std::vector<double> row;
    row.reserve(cols);
    for (const auto& c : cells) row.push_back(parse_double(c, r));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- json helpers ---------------------------------------------------------

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string("field '") + what + "' must be a number");
  return j.get<double>();
}

double number_or_inf(const json& j, const char* what) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : number(j, what);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw SchemaError(std::string("field '") + what + "' must be an integer");
  return j.get<int>();
}

std::string text(const json& j, const char* what) {
  if (!j.is_string()) throw SchemaError(std::string("field '") + what + "' must be a string");
  return j.get<std::string>();
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec_json(m.row(i).transpose()));
  return out;
}

Eigen::VectorXd vec_from(const json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("field '") + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

Eigen::MatrixXd mat_from(const json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("field '") + what + "' must be an array of rows");
  if (j.empty()) return Eigen::MatrixXd();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw SchemaError(std::string("field '") + what + "' is not rectangular");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = number(j[i][c], what);
  }
  return m;
}

std::vector<std::string> strings_from(const json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("field '") + what + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(text(s, what));
  return out;
}

json kernel_json(const KernelSpec& k) {
  return json{{"family", "gaussian_rbf"},       {"rule", to_string(k.rule)},
              {"bandwidth", k.bandwidth},       {"power_c", k.power_c},
              {"power_b", k.power_b},           {"landmark_count", k.landmark_count},
              {"jitter", k.jitter}};
}

// Every field optional; missing ones keep the defaults.
KernelSpec kernel_from(const json& j) {
  KernelSpec k;
  if (!j.is_object()) throw SchemaError("kernel must be an object");
  if (j.contains("family") && text(j["family"], "family") != "gaussian_rbf")
    throw SchemaError("only the gaussian_rbf kernel is supported");
  if (j.contains("rule")) k.rule = bandwidth_rule_from_string(text(j["rule"], "rule"));
  if (j.contains("bandwidth")) {
    k.bandwidth = number(j["bandwidth"], "bandwidth");
    if (!j.contains("rule")) k.rule = BandwidthRule::fixed;
  }
  if (j.contains("power_c")) k.power_c = number(j["power_c"], "power_c");
  if (j.contains("power_b")) k.power_b = number(j["power_b"], "power_b");
  if (j.contains("landmark_count")) k.landmark_count = integer(j["landmark_count"], "landmark_count");
  if (j.contains("landmarks")) k.landmark_count = integer(j["landmarks"], "landmarks");
  if (j.contains("jitter")) k.jitter = number(j["jitter"], "jitter");
  return k;
}

json features_json(const FeatureMap& f) { return json{{"kind", f.kind()}, {"terms", f.names()}}; }

FeatureMap features_from(const json& j) {
  return FeatureMap(text(field(j, "kind"), "kind"), strings_from(field(j, "terms"), "terms"));
}

json mixture_json(const MixtureEstimate& m) {
  json views = json::array();
  for (const auto& v : m.views) {
    if (m.backend == MixtureBackend::kernel)
      views.push_back(json{{"anchors", mat_json(v.anchors)}, {"coefficients", mat_json(v.coefficients)}});
    else
      views.push_back(json{{"emission", mat_json(v.emission)}});
  }
  json alignment = json::array();
  for (const auto& a : m.diagnostics.run_alignment) alignment.push_back(a);
  return json{{"backend", to_string(m.backend)},
              {"bandwidth", m.bandwidth},
              {"density_floor", m.density_floor},
              {"priors", vec_json(m.priors)},
              {"raw_priors", vec_json(m.raw_priors)},
              {"lambdas", vec_json(m.lambdas)},
              {"views", views},
              {"diagnostics",
               {{"tensor_residual", m.diagnostics.tensor_residual},
                {"whitened_spectrum", vec_json(m.diagnostics.whitened_spectrum)},
                {"anchor_jitter", m.diagnostics.anchor_jitter},
                {"run_alignment", alignment},
                {"alignment_margin", finite_or_null(m.diagnostics.alignment_margin)},
                {"clamped_priors", m.diagnostics.clamped_priors}}}};
}

MixtureEstimate mixture_from(const json& j) {
  MixtureEstimate m;
  const std::string backend = text(field(j, "backend"), "backend");
  if (backend == "kernel") m.backend = MixtureBackend::kernel;
  else if (backend == "discrete") m.backend = MixtureBackend::discrete;
  else throw SchemaError("unknown mixture backend '" + backend + "'");
  m.bandwidth = number(field(j, "bandwidth"), "bandwidth");
  m.density_floor = number(field(j, "density_floor"), "density_floor");
  m.priors = vec_from(field(j, "priors"), "priors");
  m.raw_priors = vec_from(field(j, "raw_priors"), "raw_priors");
  m.lambdas = vec_from(field(j, "lambdas"), "lambdas");
  const Eigen::Index k = m.priors.size();
  if (k == 0 || m.raw_priors.size() != k || m.lambdas.size() != k) throw SchemaError("prior vectors disagree on K");
  const json& views = field(j, "views");
  if (!views.is_array() || views.size() != 3) throw SchemaError("mixture must have three views");
  for (std::size_t v = 0; v < 3; ++v) {
    if (m.backend == MixtureBackend::kernel) {
      m.views[v].anchors = mat_from(field(views[v], "anchors"), "anchors");
      m.views[v].coefficients = mat_from(field(views[v], "coefficients"), "coefficients");
      if (m.views[v].coefficients.cols() != k || m.views[v].coefficients.rows() != m.views[v].anchors.rows())
        throw SchemaError("coefficient matrix does not match anchors and K");
    } else {
      m.views[v].emission = mat_from(field(views[v], "emission"), "emission");
      if (m.views[v].emission.cols() != k) throw SchemaError("emission matrix does not match K");
    }
  }
  const json& d = field(j, "diagnostics");
  m.diagnostics.tensor_residual = number(field(d, "tensor_residual"), "tensor_residual");
  m.diagnostics.whitened_spectrum = vec_from(field(d, "whitened_spectrum"), "whitened_spectrum");
  m.diagnostics.anchor_jitter = number(field(d, "anchor_jitter"), "anchor_jitter");
  const json& alignment = field(d, "run_alignment");
  if (!alignment.is_array() || alignment.size() != 3) throw SchemaError("run_alignment must hold three permutations");
  for (std::size_t v = 0; v < 3; ++v) m.diagnostics.run_alignment[v] = alignment[v].get<std::vector<int>>();
  m.diagnostics.alignment_margin = number_or_inf(field(d, "alignment_margin"), "alignment_margin");
  m.diagnostics.clamped_priors = integer(field(d, "clamped_priors"), "clamped_priors");
  return m;
}

json fit_settings_json(const FitSettings& f) {
  return json{{"k", f.k},
              {"kernel", kernel_json(f.kernel)},
              {"power", {{"restarts", f.power.restarts}, {"iterations", f.power.iterations}, {"tol", f.power.tol}}},
              {"symmetric_views", f.symmetric_views},
              {"treatment_terms", f.treatment_terms},
              {"outcome_terms", f.outcome_terms},
              {"xi_terms", f.xi_terms},
              {"ridge", f.ridge},
              {"holdout", f.holdout}};
}

FitSettings fit_settings_from(const json& j) {
  FitSettings f;
  if (!j.is_object()) throw SchemaError("fit settings must be an object");
  if (j.contains("k")) f.k = integer(j["k"], "k");
  if (j.contains("kernel")) f.kernel = kernel_from(j["kernel"]);
  if (j.contains("power")) {
    const json& p = j["power"];
    if (p.contains("restarts")) f.power.restarts = integer(p["restarts"], "restarts");
    if (p.contains("iterations")) f.power.iterations = integer(p["iterations"], "iterations");
    if (p.contains("tol")) f.power.tol = number(p["tol"], "tol");
  }
  if (j.contains("symmetric_views")) f.symmetric_views = j["symmetric_views"].get<bool>();
  if (j.contains("treatment_terms")) f.treatment_terms = strings_from(j["treatment_terms"], "treatment_terms");
  if (j.contains("outcome_terms")) f.outcome_terms = strings_from(j["outcome_terms"], "outcome_terms");
  if (j.contains("xi_terms")) f.xi_terms = strings_from(j["xi_terms"], "xi_terms");
  if (j.contains("ridge")) f.ridge = number(j["ridge"], "ridge");
  if (j.contains("holdout")) f.holdout = integer(j["holdout"], "holdout");
  return f;
}

json scenario_params_json(const ScenarioConfig& c) {
  if (c.mode == Mode::multiproxy) {
    const auto& s = c.proxy;
    json means = json::array();
    for (const auto& m : s.means) means.push_back(mat_json(m));
    return json{{"priors", vec_json(s.priors)}, {"proxy_means", means},       {"proxy_sigma", s.proxy_sigma},
                {"alpha", mat_json(s.alpha)},   {"sigma2", vec_json(s.sigma2)}, {"beta", mat_json(s.beta)},
                {"outcome_sigma", s.outcome_sigma}};
  }
  const auto& s = c.treatment;
  json emissions = json::array();
  for (const auto& e : s.emissions) emissions.push_back(mat_json(e));
  return json{{"priors", vec_json(s.priors)},
              {"emissions", emissions},
              {"gamma", mat_json(s.gamma)},
              {"noise_sigma", s.noise_sigma}};
}

}  // namespace

// ---- datasets -------------------------------------------------------------

std::string multiproxy_csv(const MultiProxyData& data) {
  data.validate();
  const Eigen::Index d = data.dim();
  std::ostringstream out;
  for (int v = 1; v <= 3; ++v)
    for (Eigen::Index j = 0; j < d; ++j) out << 'z' << v << '_' << j << ',';
  out << "a,y\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (std::size_t v = 0; v < 3; ++v)
      for (Eigen::Index j = 0; j < d; ++j) out << format_double(data.z[v](i, j)) << ',';
    out << format_double(data.a(i)) << ',' << format_double(data.y(i)) << '\n';
  }
  return out.str();
}

std::string multitreatment_csv(const MultiTreatmentData& data) {
  data.validate();
  std::ostringstream out;
  out << "a1,a2,a3,y\n";
  for (Eigen::Index i = 0; i < data.size(); ++i)
    out << data.a[0](i) << ',' << data.a[1](i) << ',' << data.a[2](i) << ',' << format_double(data.y(i)) << '\n';
  return out.str();
}

Mode detect_csv_mode(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw SchemaError("dataset is empty (no header)");
  const std::string& header = lines[0];
  if (header.rfind("a1,", 0) == 0) return Mode::multitreatment;
  if (header.rfind("z1_0,", 0) == 0) return Mode::multiproxy;
  throw SchemaError("unrecognized dataset header '" + header + "'");
}

MultiProxyData parse_multiproxy_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw SchemaError("dataset is empty (no header)");
  const auto header = split(lines[0], ',');
  if (header.size() < 5 || (header.size() - 2) % 3 != 0)
    throw SchemaError("multiproxy header must be z1_*, z2_*, z3_*, a, y");
  const std::size_t d = (header.size() - 2) / 3;
  for (std::size_t v = 0; v < 3; ++v)
    for (std::size_t j = 0; j < d; ++j) {
      const std::string expected = "z" + std::to_string(v + 1) + "_" + std::to_string(j);
      if (header[v * d + j] != expected)
        throw SchemaError("header column " + std::to_string(v * d + j) + " is '" + header[v * d + j] + "', expected '" +
                          expected + "'");
    }
  if (header[3 * d] != "a" || header[3 * d + 1] != "y") throw SchemaError("last two header columns must be a, y");

  const auto rows = parse_rows(lines, header.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto dd = static_cast<Eigen::Index>(d);
  MultiProxyData data;
  for (auto& z : data.z) z.resize(n, dd);
  data.a.resize(n);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t v = 0; v < 3; ++v)
      for (Eigen::Index j = 0; j < dd; ++j) data.z[v](i, j) = r[v * d + static_cast<std::size_t>(j)];
    data.a(i) = r[3 * d];
    data.y(i) = r[3 * d + 1];
  }
  return data;
}

MultiTreatmentData parse_multitreatment_csv(const std::string& text, int levels) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw SchemaError("dataset is empty (no header)");
  if (lines[0] != "a1,a2,a3,y") throw SchemaError("multitreatment header must be a1,a2,a3,y");
  const auto rows = parse_rows(lines, 4);
  const auto n = static_cast<Eigen::Index>(rows.size());
  MultiTreatmentData data;
  for (auto& a : data.a) a.resize(n);
  data.y.resize(n);
  int top = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t v = 0; v < 3; ++v) {
      if (r[v] < 0 || r[v] != std::floor(r[v]) || r[v] > 1e6)
        throw SchemaError("row " + std::to_string(i + 1) + ": treatment levels must be nonnegative integers");
      data.a[v](i) = static_cast<int>(r[v]);
      top = std::max(top, data.a[v](i));
    }
    data.y(i) = r[3];
  }
  data.levels = levels > 0 ? levels : top + 1;
  if (data.levels < 1) data.levels = 1;
  data.validate();
  return data;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IOError("failed writing '" + path + "'");
}

// ---- models ---------------------------------------------------------------

std::string model_to_json(const SavedModel& model) {
  json j{{"schema_version", kModelSchemaVersion}, {"mode", to_string(model.mode)}, {"seed", model.seed},
         {"kernel", kernel_json(model.kernel)}};
  if (model.mode == Mode::multiproxy) {
    const auto& f = model.proxy;
    j["mixture"] = mixture_json(f.mixture);
    j["treatment"] = json{{"family", "gaussian"},
                          {"features", features_json(f.treatment.features)},
                          {"alpha", mat_json(f.treatment.alpha)},
                          {"sigma2", vec_json(f.treatment.sigma2)},
                          {"mean_ridge", f.treatment.mean_fit.ridge},
                          {"mean_ridge_escalated", f.treatment.mean_fit.escalated},
                          {"variance_ridge", f.treatment.variance_fit.ridge},
                          {"variance_ridge_escalated", f.treatment.variance_fit.escalated},
                          {"clamped_variances", f.treatment.clamped_variances}};
    j["outcome"] = json{{"features", features_json(f.outcome.features)},
                        {"beta", mat_json(f.outcome.beta)},
                        {"ridge", f.outcome.fit.ridge},
                        {"ridge_escalated", f.outcome.fit.escalated}};
    j["ate"] = json{{"feature_expectations", mat_json(f.causal.feature_expectations)}};
    j["diagnostics"] = json{{"proxy_fallback_rows", f.proxy_fallback_rows},
                            {"treatment_fallback_rows", f.treatment_fallback_rows}};
  } else {
    const auto& m = model.treatment;
    j["mixture"] = mixture_json(m.mixture);
    j["outcome"] = json{{"features", features_json(m.xi)},
                        {"gamma", mat_json(m.gamma)},
                        {"ridge", m.fit.ridge},
                        {"ridge_escalated", m.fit.escalated}};
    j["diagnostics"] = json{{"fallback_rows", m.fallback_rows}};
  }
  return j.dump(1) + "\n";
}

SavedModel model_from_json(const std::string& text_in) {
  json j;
  try {
    j = json::parse(text_in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    SavedModel model;
    const int version = integer(field(j, "schema_version"), "schema_version");
    if (version != kModelSchemaVersion)
      throw SchemaError("unsupported schema_version " + std::to_string(version));
    const std::string mode = text(field(j, "mode"), "mode");
    if (mode == "multiproxy") model.mode = Mode::multiproxy;
    else if (mode == "multitreatment") model.mode = Mode::multitreatment;
    else throw SchemaError("unknown mode '" + mode + "'");
    if (!field(j, "seed").is_number_unsigned() && !field(j, "seed").is_number_integer())
      throw SchemaError("seed must be an integer");
    model.seed = j["seed"].get<std::uint64_t>();
    model.kernel = kernel_from(field(j, "kernel"));
    const MixtureEstimate mixture = mixture_from(field(j, "mixture"));
    const Eigen::Index k = mixture.priors.size();
    const json& outcome = field(j, "outcome");
    if (model.mode == Mode::multiproxy) {
      auto& f = model.proxy;
      f.mixture = mixture;
      const json& t = field(j, "treatment");
      if (text(field(t, "family"), "family") != "gaussian") throw SchemaError("only gaussian treatments are supported");
      f.treatment.features = features_from(field(t, "features"));
      f.treatment.alpha = mat_from(field(t, "alpha"), "alpha");
      f.treatment.sigma2 = vec_from(field(t, "sigma2"), "sigma2");
      f.treatment.mean_fit = {number(field(t, "mean_ridge"), "mean_ridge"), field(t, "mean_ridge_escalated").get<bool>()};
      f.treatment.variance_fit = {number(field(t, "variance_ridge"), "variance_ridge"),
                                  field(t, "variance_ridge_escalated").get<bool>()};
      f.treatment.clamped_variances = integer(field(t, "clamped_variances"), "clamped_variances");
      f.outcome.features = features_from(field(outcome, "features"));
      f.outcome.beta = mat_from(field(outcome, "beta"), "beta");
      f.outcome.fit = {number(field(outcome, "ridge"), "ridge"), field(outcome, "ridge_escalated").get<bool>()};
      f.causal.priors = mixture.priors;
      f.causal.outcome = f.outcome;
      f.causal.feature_expectations = mat_from(field(field(j, "ate"), "feature_expectations"), "feature_expectations");
      const json& d = field(j, "diagnostics");
      f.proxy_fallback_rows = integer(field(d, "proxy_fallback_rows"), "proxy_fallback_rows");
      f.treatment_fallback_rows = integer(field(d, "treatment_fallback_rows"), "treatment_fallback_rows");
      const Eigen::Index m = f.outcome.features.output_dim();
      if (f.treatment.alpha.rows() != k || f.treatment.alpha.cols() != f.treatment.features.output_dim() ||
          f.treatment.sigma2.size() != k || f.outcome.beta.rows() != k || f.outcome.beta.cols() != m ||
          f.causal.feature_expectations.rows() != k || f.causal.feature_expectations.cols() != m)
        throw SchemaError("model blocks disagree on K or feature dimensions");
    } else {
      auto& m = model.treatment;
      m.mixture = mixture;
      m.xi = features_from(field(outcome, "features"));
      m.gamma = mat_from(field(outcome, "gamma"), "gamma");
      m.fit = {number(field(outcome, "ridge"), "ridge"), field(outcome, "ridge_escalated").get<bool>()};
      m.fallback_rows = integer(field(field(j, "diagnostics"), "fallback_rows"), "fallback_rows");
      if (m.gamma.rows() != k || m.gamma.cols() != m.xi.output_dim())
        throw SchemaError("gamma does not match K or the feature map");
    }
    return model;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
}

// ---- scenarios ------------------------------------------------------------

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "paper-7.1") {
    c.mode = Mode::multiproxy;
    c.proxy = MultiProxyScenario::paper_default();
    c.fit.k = 3;
    c.fit.kernel.rule = BandwidthRule::fixed;
    c.fit.kernel.bandwidth = 1.0;
    c.fit.kernel.landmark_count = 1000;
    return c;
  }
  if (name == "paper-7.2") {
    c.mode = Mode::multitreatment;
    c.treatment = MultiTreatmentScenario::paper_default();
    c.fit.k = 2;
    return c;
  }
  throw InvalidConfig("unknown scenario '" + name + "' (built-ins: paper-7.1, paper-7.2)");
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  if (name_or_path == "paper-7.1" || name_or_path == "paper-7.2") return builtin_scenario(name_or_path);
  return scenario_from_json(read_file(name_or_path));
}

ScenarioConfig scenario_from_json(const std::string& text_in) {
  json j;
  try {
    j = json::parse(text_in);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("scenario config is not valid JSON: ") + e.what());
  }
  try {
    ScenarioConfig c;
    c.name = j.contains("name") ? text(j["name"], "name") : "custom";
    c.mode = mode_from_string(text(field(j, "mode"), "mode"));
    if (c.mode == Mode::multiproxy) {
      auto& s = c.proxy;
      s.priors = vec_from(field(j, "priors"), "priors");
      const json& means = field(j, "proxy_means");
      if (!means.is_array() || means.size() != 3) throw SchemaError("proxy_means must hold three K x d matrices");
      for (std::size_t v = 0; v < 3; ++v) s.means[v] = mat_from(means[v], "proxy_means");
      s.proxy_sigma = number(field(j, "proxy_sigma"), "proxy_sigma");
      s.alpha = mat_from(field(j, "alpha"), "alpha");
      s.sigma2 = vec_from(field(j, "sigma2"), "sigma2");
      s.beta = mat_from(field(j, "beta"), "beta");
      s.outcome_sigma = j.contains("outcome_sigma") ? number(j["outcome_sigma"], "outcome_sigma") : 1.0;
      s.validate();
    } else {
      auto& s = c.treatment;
      s.priors = vec_from(field(j, "priors"), "priors");
      const json& e = field(j, "emissions");
      if (!e.is_array() || e.size() != 3) throw SchemaError("emissions must hold three S x K matrices");
      for (std::size_t v = 0; v < 3; ++v) s.emissions[v] = mat_from(e[v], "emissions");
      s.gamma = mat_from(field(j, "gamma"), "gamma");
      s.noise_sigma = j.contains("noise_sigma") ? number(j["noise_sigma"], "noise_sigma") : 1.0;
      s.validate();
    }
    if (j.contains("fit")) c.fit = fit_settings_from(j["fit"]);
    if (c.fit.k == 0) c.fit.k = c.mode == Mode::multiproxy ? c.proxy.k() : c.treatment.k();
    return c;
  } catch (const SchemaError& e) {
    throw InvalidConfig(std::string("scenario config: ") + e.what());
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("scenario config: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json j = scenario_params_json(c);
  j["name"] = c.name;
  j["mode"] = to_string(c.mode);
  j["fit"] = fit_settings_json(c.fit);
  return j.dump(2) + "\n";
}

std::string truth_to_json(const ScenarioConfig& c, Eigen::Index n, std::uint64_t seed, const Eigen::VectorXi& labels) {
  json j = scenario_params_json(c);
  j["scenario"] = c.name;
  j["mode"] = to_string(c.mode);
  j["n"] = n;
  j["seed"] = seed;
  std::vector<int> l(labels.data(), labels.data() + labels.size());
  j["labels"] = l;
  return j.dump(1) + "\n";
}

}  // namespace tensorcate
