#include "tensorcate/benchmark.hpp"

#include "tensorcate/errors.hpp"
#include "tensorcate/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace tensorcate {

int default_thread_count() {
  if (const char* env = std::getenv("TENSORCATE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::uint64_t trial_seed(std::uint64_t seed, Eigen::Index n, int trial) {
  return split_seed(split_seed(split_seed(seed, stream::kTrial), static_cast<std::uint64_t>(n)),
                    static_cast<std::uint64_t>(trial));
}

MultiProxyOptions proxy_options(const FitSettings& fit, int d, std::uint64_t seed) {
  MultiProxyOptions o;
  o.k = fit.k;
  o.mixture.kernel = fit.kernel;
  o.mixture.power = fit.power;
  o.mixture.seed = seed;
  o.mixture.holdout = fit.holdout;
  o.symmetric_views = fit.symmetric_views;
  if (!fit.treatment_terms.empty()) o.treatment_features = FeatureMap::custom(fit.treatment_terms);
  if (!fit.outcome_terms.empty()) o.outcome_features = FeatureMap::custom(fit.outcome_terms);
  o.ridge = fit.ridge;
  return with_default_features(o, d);
}

MultiTreatmentOptions treatment_options(const FitSettings& fit, std::uint64_t seed) {
  MultiTreatmentOptions o;
  o.k = fit.k;
  o.mixture.power = fit.power;
  o.mixture.seed = seed;
  o.mixture.holdout = fit.holdout;
  if (!fit.xi_terms.empty()) o.xi = FeatureMap::custom(fit.xi_terms);
  o.ridge = fit.ridge;
  return o;
}

std::vector<BenchmarkRow> run_trial(const ScenarioConfig& config, Eigen::Index n, int trial, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkRow base;
  base.scenario = config.name;
  base.n = n;
  base.trial = trial;
  base.seed = seed;
  std::vector<BenchmarkRow> rows;
  try {
    Eigen::MatrixXd estimate_coef, truth_coef;
    Eigen::VectorXd priors, truth_priors;
    std::string coef_name;
    Eigen::VectorXd coef_estimate, coef_truth;
    if (config.mode == Mode::multiproxy) {
      const auto& s = config.proxy;
      const MultiProxySample sample = simulate_multiproxy(s, n, seed);
      const MultiProxyFit fit = fit_multiproxy(sample.data, proxy_options(config.fit, s.d(), seed));
      estimate_coef = fit.outcome.beta;
      truth_coef = s.beta;
      priors = fit.mixture.priors;
      truth_priors = s.priors;
      coef_name = "beta_a";
    } else {
      const auto& s = config.treatment;
      const MultiTreatmentSample sample = simulate_multitreatment(s, n, seed);
      const MultiTreatmentModel model = fit_multitreatment(sample.data, treatment_options(config.fit, seed));
      estimate_coef = model.gamma;
      truth_coef = s.gamma;
      priors = model.priors();
      truth_priors = s.priors;
      coef_name = "gamma_norm";
    }
    if (estimate_coef.rows() != truth_coef.rows() || estimate_coef.cols() != truth_coef.cols())
      throw InvalidConfig("fitted K or feature map differs from the scenario truth; cannot align");
    const Alignment al = align_permutation(estimate_coef, truth_coef);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (int u = 0; u < static_cast<int>(truth_coef.rows()); ++u) {
      const int src = al.perm[static_cast<std::size_t>(u)];
      BenchmarkRow r = base;
      r.component = u;
      r.wall_ms = ms;
      if (config.mode == Mode::multiproxy) {
        r.parameter = coef_name;
        r.estimate = estimate_coef(src, 1);
        r.truth = truth_coef(u, 1);
      } else {
        r.parameter = coef_name;
        r.estimate = estimate_coef.row(src).norm();
        r.truth = truth_coef.row(u).norm();
      }
      r.aligned_abs_error = std::abs(r.estimate - r.truth);
      rows.push_back(r);
      r.parameter = "prior";
      r.estimate = priors(src);
      r.truth = truth_priors(u);
      r.aligned_abs_error = std::abs(r.estimate - r.truth);
      rows.push_back(r);
    }
  } catch (const Error& e) {
    BenchmarkRow r = base;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.error = e.what();
    rows.push_back(r);
  }
  return rows;
}

std::vector<BenchmarkRow> run_benchmark(const ScenarioConfig& config, const BenchmarkOptions& opts) {
  if (opts.ns.empty()) throw InvalidConfig("benchmark needs at least one sample size");
  if (opts.trials < 1) throw InvalidConfig("benchmark needs at least one trial");
  std::vector<std::pair<Eigen::Index, int>> jobs;
  for (Eigen::Index n : opts.ns)
    for (int t = 0; t < opts.trials; ++t) jobs.emplace_back(n, t);
  std::vector<std::vector<BenchmarkRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto [n, t] = jobs[j];
      results[j] = run_trial(config, n, t, trial_seed(opts.seed, n, t));
    }
  };
  const int threads = std::min<int>(opts.threads > 0 ? opts.threads : default_thread_count(),
                                    static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<BenchmarkRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "scenario,n,trial,seed,component,parameter,estimate,truth,aligned_abs_error,wall_ms,error\n";
  for (const auto& r : rows) {
    out << csv_field(r.scenario) << ',' << r.n << ',' << r.trial << ',' << r.seed << ',';
    if (r.error.empty()) {
      out << r.component + 1 << ',' << r.parameter << ',' << num(r.estimate) << ',' << num(r.truth) << ','
          << num(r.aligned_abs_error) << ',';
    } else {
      out << ",,,,,";
    }
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_ms);
    out << ms << ',' << csv_field(r.error) << '\n';
  }
  return out.str();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows) {
  std::map<std::tuple<Eigen::Index, std::string, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::map<std::tuple<Eigen::Index, std::string, int>, double> truth;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    const auto key = std::make_tuple(r.n, r.parameter, r.component);
    groups[key].first.push_back(r.aligned_abs_error);
    groups[key].second.push_back(r.estimate);
    truth[key] = r.truth;
  }
  std::vector<BenchmarkSummary> out;
  for (const auto& [key, vals] : groups) {
    BenchmarkSummary s;
    std::tie(s.n, s.parameter, s.component) = key;
    s.count = static_cast<int>(vals.first.size());
    s.median_abs_error = median(vals.first);
    s.q90_abs_error = quantile(vals.first, 0.9);
    s.median_estimate = median(vals.second);
    s.truth = truth[key];
    out.push_back(s);
  }
  return out;
}

}  // namespace tensorcate
