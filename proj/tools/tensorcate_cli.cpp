// tensorcate command-line interface.
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure or
// malformed model file.

#include "tensorcate/benchmark.hpp"
#include "tensorcate/errors.hpp"
#include "tensorcate/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

using namespace tensorcate;
using nlohmann::json;

namespace {

// Numerical failures tagged with the pipeline stage that raised them.
struct StageFailure {
  std::string stage;
  std::string message;
};

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw StageFailure{stage, e.what()};
  }
}

std::string truth_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + ".truth.json";
}

struct KernelFlags {
  std::string rule;
  std::optional<double> bandwidth;
  std::optional<int> landmarks;

  void add(CLI::App* cmd) {
    cmd->add_option("--kernel", rule, "bandwidth rule: fixed, median_heuristic or power_rule");
    cmd->add_option("--bandwidth", bandwidth, "RBF bandwidth (implies --kernel fixed)")->check(CLI::PositiveNumber);
    cmd->add_option("--landmarks", landmarks, "anchor points per view")->check(CLI::PositiveNumber);
  }

  void apply(KernelSpec& k) const {
    if (bandwidth) {
      k.bandwidth = *bandwidth;
      k.rule = BandwidthRule::fixed;
    }
    if (!rule.empty()) k.rule = bandwidth_rule_from_string(rule);
    if (landmarks) k.landmark_count = *landmarks;
  }
};

FitSettings settings_from(const std::string& config, Mode mode) {
  if (config.empty()) {
    FitSettings f;
    f.k = 0;
    return f;
  }
  const ScenarioConfig c = load_scenario(config);
  if (c.mode != mode) throw InvalidConfig("config '" + config + "' is for mode " + to_string(c.mode));
  return c.fit;
}

void print_fit_diagnostics(const MixtureEstimate& m) {
  std::cerr << "priors:";
  for (Eigen::Index u = 0; u < m.priors.size(); ++u) std::cerr << ' ' << m.priors(u);
  std::cerr << "\nlambdas:";
  for (Eigen::Index u = 0; u < m.lambdas.size(); ++u) std::cerr << ' ' << m.lambdas(u);
  std::cerr << "\ntensor residual: " << m.diagnostics.tensor_residual;
  if (m.backend == MixtureBackend::kernel)
    std::cerr << "\nbandwidth: " << m.bandwidth << "\nanchor jitter: " << m.diagnostics.anchor_jitter;
  std::cerr << "\nclamped priors: " << m.diagnostics.clamped_priors << '\n';
}

int cmd_simulate(const std::string& mode_name, const std::string& scenario, Eigen::Index n, std::uint64_t seed,
                 const std::string& out) {
  const Mode mode = mode_from_string(mode_name);
  const std::string source = !scenario.empty() ? scenario : (mode == Mode::multiproxy ? "paper-7.1" : "paper-7.2");
  const ScenarioConfig config = load_scenario(source);
  if (config.mode != mode) throw InvalidConfig("scenario '" + source + "' is for mode " + to_string(config.mode));
  Eigen::VectorXi labels;
  if (mode == Mode::multiproxy) {
    const MultiProxySample s = simulate_multiproxy(config.proxy, n, seed);
    write_file(out, multiproxy_csv(s.data));
    labels = s.labels;
  } else {
    const MultiTreatmentSample s = simulate_multitreatment(config.treatment, n, seed);
    write_file(out, multitreatment_csv(s.data));
    labels = s.labels;
  }
  write_file(truth_path(out), truth_to_json(config, n, seed, labels));
  std::cerr << "wrote " << n << " rows to " << out << " and ground truth to " << truth_path(out) << '\n';
  return 0;
}

struct FitFlags {
  std::string mode;
  std::string input;
  std::string out;
  std::string config;
  int k = 0;
  std::uint64_t seed = 0;
  bool symmetric = false;
  std::optional<int> restarts, iterations;
  int levels = 0;
  KernelFlags kernel;
};

int cmd_fit(const FitFlags& f) {
  const Mode mode = mode_from_string(f.mode);
  FitSettings settings = settings_from(f.config, mode);
  f.kernel.apply(settings.kernel);
  if (f.k > 0) settings.k = f.k;
  if (settings.k <= 0) throw InvalidConfig("--k is required (or a config with fit.k)");
  if (f.symmetric) settings.symmetric_views = true;
  if (f.restarts) settings.power.restarts = *f.restarts;
  if (f.iterations) settings.power.iterations = *f.iterations;

  SavedModel model;
  model.mode = mode;
  model.seed = f.seed;
  model.kernel = settings.kernel;
  const std::string text = read_file(f.input);
  if (mode == Mode::multiproxy) {
    const MultiProxyData data = parse_multiproxy_csv(text);
    const MultiProxyOptions opts = proxy_options(settings, static_cast<int>(data.dim()), f.seed);
    const MixtureEstimate mixture = in_stage("mixture learning", [&] {
      return opts.symmetric_views ? fit_symmetric_spectral(data.z[0], data.z[1], data.z[2], opts.k, opts.mixture)
                                  : fit_multiview(data.z[0], data.z[1], data.z[2], opts.k, opts.mixture);
    });
    model.proxy = in_stage("treatment and outcome regression", [&] { return fit_causal_stages(data, mixture, opts); });
    print_fit_diagnostics(model.proxy.mixture);
    std::cerr << "sigma2 clamped: " << model.proxy.treatment.clamped_variances
              << "\nridge (treatment, outcome): " << model.proxy.treatment.mean_fit.ridge << ", "
              << model.proxy.outcome.fit.ridge << "\nposterior fallback rows (proxy, treatment): "
              << model.proxy.proxy_fallback_rows << ", " << model.proxy.treatment_fallback_rows << '\n';
  } else {
    const MultiTreatmentData data = parse_multitreatment_csv(text, f.levels);
    const MultiTreatmentOptions opts = treatment_options(settings, f.seed);
    const MixtureEstimate mixture = in_stage("mixture learning", [&] {
      return fit_discrete_multiview(data.a[0], data.a[1], data.a[2], data.levels, opts.k, opts.mixture);
    });
    const FeatureMap xi = opts.xi.output_dim() == 0 ? FeatureMap::treatments_linear() : opts.xi;
    model.treatment =
        in_stage("outcome regression", [&] { return fit_multitreatment_outcome(data, mixture, xi, opts.ridge); });
    print_fit_diagnostics(model.treatment.mixture);
    std::cerr << "ridge: " << model.treatment.fit.ridge << "\nposterior fallback rows: " << model.treatment.fallback_rows
              << '\n';
  }
  write_file(f.out, model_to_json(model));
  return 0;
}

struct EstimateFlags {
  std::string model;
  std::vector<double> a;
  int u = 0;
  std::vector<double> z;
};

int cmd_estimate(const EstimateFlags& f, bool ate) {
  const SavedModel model = model_from_json(read_file(f.model));
  json out;
  if (model.mode == Mode::multiproxy) {
    const auto& fit = model.proxy;
    if (ate) {
      if (f.a.empty()) throw InvalidConfig("--a needs at least one value");
      json values = json::array(), parts = json::array();
      for (double a : f.a) {
        const Eigen::VectorXd c = ate_components(fit.causal, a);
        values.push_back(estimate_ate(fit.causal, a));
        parts.push_back(std::vector<double>(c.data(), c.data() + c.size()));
      }
      out = {{"estimand", "ate"}, {"inputs", {{"a", f.a}}}, {"value", values}, {"per_component", parts}};
    } else {
      if (f.a.size() != 1) throw InvalidConfig("cate takes a single --a value");
      const int k = static_cast<int>(fit.outcome.beta.rows());
      if (f.u < 1 || f.u > k) throw InvalidConfig("--u must be in 1.." + std::to_string(k));
      const auto d = static_cast<Eigen::Index>(fit.mixture.views[0].anchors.cols());
      if (static_cast<Eigen::Index>(f.z.size()) != 3 * d)
        throw InvalidConfig("--z needs " + std::to_string(3 * d) + " values (z1, z2, z3 concatenated)");
      std::array<Eigen::RowVectorXd, 3> z;
      for (std::size_t v = 0; v < 3; ++v)
        z[v] = Eigen::Map<const Eigen::RowVectorXd>(f.z.data() + v * static_cast<std::size_t>(d), d);
      out = {{"estimand", "cate"},
             {"inputs", {{"u", f.u}, {"a", f.a[0]}, {"z", f.z}}},
             {"value", estimate_cate(fit.outcome, f.u - 1, f.a[0], z)}};
    }
  } else {
    const auto& m = model.treatment;
    if (f.a.size() != 3) throw InvalidConfig("multi-treatment models take --a a1 a2 a3");
    const std::array<double, 3> a{f.a[0], f.a[1], f.a[2]};
    if (ate) {
      std::vector<double> parts;
      for (Eigen::Index u = 0; u < m.gamma.rows(); ++u)
        parts.push_back(m.priors()(u) * mt_cate(m, static_cast<int>(u), a));
      out = {{"estimand", "ate"}, {"inputs", {{"a", f.a}}}, {"value", mt_ate(m, a)}, {"per_component", parts}};
    } else {
      const int k = static_cast<int>(m.gamma.rows());
      if (f.u < 1 || f.u > k) throw InvalidConfig("--u must be in 1.." + std::to_string(k));
      out = {{"estimand", "cate"}, {"inputs", {{"u", f.u}, {"a", f.a}}}, {"value", mt_cate(m, f.u - 1, a)}};
    }
  }
  std::cout << out.dump() << '\n';
  return 0;
}

struct RankFlags {
  std::string input;
  std::string config;
  std::string csv;
  int max_k = 10;
  int levels = 0;
  std::uint64_t seed = 0;
  KernelFlags kernel;
};

int cmd_rank(const RankFlags& f) {
  const std::string text = read_file(f.input);
  const Mode mode = detect_csv_mode(text);
  Eigen::VectorXd values;
  Eigen::Index n = 0;
  int max_k = f.max_k;
  if (mode == Mode::multiproxy) {
    const MultiProxyData data = parse_multiproxy_csv(text);
    n = data.size();
    if (max_k > n) {
      std::cerr << "warning: --max-k " << max_k << " exceeds n = " << n << "; clipped\n";
      max_k = static_cast<int>(n);
    }
    KernelSpec kernel = settings_from(f.config, mode).kernel;
    f.kernel.apply(kernel);
    values = scree(data.z[0], data.z[1], kernel, max_k, f.seed);
  } else {
    const MultiTreatmentData data = parse_multitreatment_csv(text, f.levels);
    n = data.size();
    if (max_k > data.levels) {
      std::cerr << "warning: --max-k " << max_k << " exceeds the " << data.levels << " treatment levels; clipped\n";
      max_k = data.levels;
    }
    if (max_k > n) {
      std::cerr << "warning: --max-k " << max_k << " exceeds n = " << n << "; clipped\n";
      max_k = static_cast<int>(n);
    }
    values = discrete_scree(data.a[0], data.a[1], data.levels, max_k);
  }
  const int k = select_rank(values, n);
  std::cout << "singular values:";
  for (Eigen::Index j = 0; j < values.size(); ++j) std::cout << ' ' << values(j);
  std::cout << "\nselected K: " << k << '\n';
  const std::string csv_path = f.csv.empty() ? f.input + ".scree.csv" : f.csv;
  std::ostringstream csv;
  csv << "index,singular_value\n";
  char buf[40];
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", values(j));
    csv << j + 1 << ',' << buf << '\n';
  }
  write_file(csv_path, csv.str());
  return 0;
}

struct BenchFlags {
  std::string scenario;
  std::vector<Eigen::Index> ns;
  int trials = 20;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

int cmd_benchmark(const BenchFlags& f) {
  const ScenarioConfig config = load_scenario(f.scenario);
  BenchmarkOptions opts;
  opts.ns = f.ns;
  opts.trials = f.trials;
  opts.seed = f.seed;
  opts.threads = f.threads;
  const auto rows = run_benchmark(config, opts);
  write_file(f.out, benchmark_csv(rows));
  int errors = 0;
  for (const auto& r : rows) errors += r.error.empty() ? 0 : 1;
  std::cout << "n,parameter,component,trials,truth,median_estimate,median_abs_error,q90_abs_error\n";
  for (const auto& s : summarize(rows))
    std::cout << s.n << ',' << s.parameter << ',' << s.component + 1 << ',' << s.count << ',' << s.truth << ','
              << s.median_estimate << ',' << s.median_abs_error << ',' << s.q90_abs_error << '\n';
  if (errors > 0) std::cerr << errors << " trial(s) failed; see the error column of " << f.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal effects under a latent categorical confounder via tensor spectral learning"};
  app.require_subcommand(1);

  std::string sim_mode = "multiproxy", sim_scenario, sim_out;
  Eigen::Index sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "draw a dataset from a scenario; writes <out> and <stem>.truth.json");
  sim->add_option("mode", sim_mode, "multiproxy or multitreatment")->required();
  sim->add_option("--scenario", sim_scenario, "paper-7.1, paper-7.2 or a scenario JSON path");
  sim->add_option("--n", sim_n, "rows")->required()->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--out", sim_out, "output CSV")->required();

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "fit a model to a dataset CSV");
  fit->add_option("mode", fit_flags.mode, "multiproxy or multitreatment")->required();
  fit->add_option("--input", fit_flags.input, "dataset CSV")->required();
  fit->add_option("--k", fit_flags.k, "number of latent components")->check(CLI::PositiveNumber);
  fit->add_option("--config", fit_flags.config, "scenario name or JSON whose fit settings are used");
  fit->add_option("--seed", fit_flags.seed, "random seed");
  fit->add_option("--out", fit_flags.out, "model JSON")->required();
  fit->add_flag("--symmetric", fit_flags.symmetric, "views share one distribution per component");
  fit->add_option("--restarts", fit_flags.restarts, "power-method restarts")->check(CLI::PositiveNumber);
  fit->add_option("--iterations", fit_flags.iterations, "power-method iterations")->check(CLI::PositiveNumber);
  fit->add_option("--levels", fit_flags.levels, "treatment levels (multitreatment; default max + 1)");
  fit_flags.kernel.add(fit);

  EstimateFlags est_flags;
  auto* est = app.add_subcommand("estimate", "evaluate a fitted model");
  est->add_option("--model", est_flags.model, "model JSON")->required();
  est->require_subcommand(1);
  auto* ate = est->add_subcommand("ate", "average treatment effect at one or more treatment values");
  ate->add_option("--a", est_flags.a, "treatment value(s); three values for multitreatment")->required();
  auto* cate = est->add_subcommand("cate", "effect within one latent component");
  cate->add_option("--u", est_flags.u, "component (1-based)")->required();
  cate->add_option("--a", est_flags.a, "treatment value; three values for multitreatment")->required();
  cate->add_option("--z", est_flags.z, "proxies z1, z2, z3 concatenated (multiproxy)");

  RankFlags rank_flags;
  auto* rank = app.add_subcommand("rank", "scree values and spectral-gap choice of K");
  rank->add_option("--input", rank_flags.input, "dataset CSV")->required();
  rank->add_option("--max-k", rank_flags.max_k, "number of singular values")->check(CLI::PositiveNumber);
  rank->add_option("--config", rank_flags.config, "scenario name or JSON whose kernel settings are used");
  rank->add_option("--seed", rank_flags.seed, "random seed");
  rank->add_option("--levels", rank_flags.levels, "treatment levels (multitreatment; default max + 1)");
  rank->add_option("--csv", rank_flags.csv, "scree CSV path (default <input>.scree.csv)");
  rank_flags.kernel.add(rank);

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("benchmark", "repeated seeded trials against the ground truth");
  bench->add_option("--scenario", bench_flags.scenario, "paper-7.1, paper-7.2 or a scenario JSON path")->required();
  bench->add_option("--ns", bench_flags.ns, "sample sizes")->required()->delimiter(',');
  bench->add_option("--trials", bench_flags.trials, "trials per sample size")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_flags.seed, "master seed");
  bench->add_option("--threads", bench_flags.threads, "worker threads (default TENSORCATE_THREADS or cores)");
  bench->add_option("--out", bench_flags.out, "report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(sim_mode, sim_scenario, sim_n, sim_seed, sim_out);
    if (*fit) return cmd_fit(fit_flags);
    if (*est) return cmd_estimate(est_flags, ate->parsed());
    if (*rank) return cmd_rank(rank_flags);
    if (*bench) return cmd_benchmark(bench_flags);
  } catch (const StageFailure& e) {
    std::cerr << "error in " << e.stage << ": " << e.message << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
