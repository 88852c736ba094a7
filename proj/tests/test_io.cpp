#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tensorcate/benchmark.hpp"
#include "tensorcate/errors.hpp"
#include "tensorcate/io.hpp"

#include <set>

using namespace tensorcate;

namespace {

std::string config_path(const std::string& name) { return std::string(TENSORCATE_SOURCE_DIR) + "/configs/" + name; }

SavedModel small_proxy_model() {
  ScenarioConfig cfg = builtin_scenario("paper-7.1");
  const MultiProxySample s = simulate_multiproxy(cfg.proxy, 600, 1);
  cfg.fit.kernel.landmark_count = 200;
  SavedModel m;
  m.mode = Mode::multiproxy;
  m.seed = 5;
  m.kernel = cfg.fit.kernel;
  m.proxy = fit_multiproxy(s.data, proxy_options(cfg.fit, 3, 5));
  return m;
}

SavedModel small_treatment_model() {
  const ScenarioConfig cfg = builtin_scenario("paper-7.2");
  const MultiTreatmentSample s = simulate_multitreatment(cfg.treatment, 1000, 2);
  SavedModel m;
  m.mode = Mode::multitreatment;
  m.seed = 3;
  m.treatment = fit_multitreatment(s.data, treatment_options(cfg.fit, 3));
  return m;
}

}  // namespace

TEST_CASE("dataset CSV round-trips exactly") {
  const MultiProxySample p = simulate_multiproxy(MultiProxyScenario::paper_default(), 300, 4);
  const MultiProxyData back = parse_multiproxy_csv(multiproxy_csv(p.data));
  for (int v = 0; v < 3; ++v) CHECK(back.z[v] == p.data.z[v]);
  CHECK(back.a == p.data.a);
  CHECK(back.y == p.data.y);
  CHECK(detect_csv_mode(multiproxy_csv(p.data)) == Mode::multiproxy);

  const MultiTreatmentSample t = simulate_multitreatment(MultiTreatmentScenario::paper_default(), 300, 4);
  const MultiTreatmentData tb = parse_multitreatment_csv(multitreatment_csv(t.data), 5);
  for (int v = 0; v < 3; ++v) CHECK(tb.a[v] == t.data.a[v]);
  CHECK(tb.y == t.data.y);
  CHECK(tb.levels == 5);
  CHECK(detect_csv_mode(multitreatment_csv(t.data)) == Mode::multitreatment);

  const std::string header_only = multiproxy_csv(simulate_multiproxy(MultiProxyScenario::paper_default(), 0, 1).data);
  CHECK(std::count(header_only.begin(), header_only.end(), '\n') == 1);
}

TEST_CASE("malformed datasets raise schema errors") {
  CHECK_THROWS_AS(parse_multiproxy_csv("z1_0,z2_0,z3_0,a\n1,2,3,4\n"), SchemaError);
  CHECK_THROWS_AS(parse_multiproxy_csv("z1_0,z2_0,z3_0,a,y\n1,2,3,4\n"), SchemaError);
  CHECK_THROWS_AS(parse_multiproxy_csv("z1_0,z2_0,z3_0,a,y\n1,2,nan,4,5\n"), SchemaError);
  CHECK_THROWS_AS(parse_multiproxy_csv("z1_0,z2_0,z3_0,a,y\n1,2,x,4,5\n"), SchemaError);
  CHECK_THROWS_AS(parse_multitreatment_csv("a1,a2,a3,y\n0,1.5,2,1\n"), SchemaError);
  CHECK_THROWS_AS(parse_multitreatment_csv("a1,a2,a3,y\n0,-1,2,1\n"), SchemaError);
  CHECK_THROWS_AS(detect_csv_mode("foo,bar\n"), SchemaError);
}

TEST_CASE("multiproxy model round-trip") {
  const SavedModel m = small_proxy_model();
  const std::string text = model_to_json(m);
  const SavedModel back = model_from_json(text);
  CHECK(model_to_json(back) == text);

  const MultiProxySample s = simulate_multiproxy(MultiProxyScenario::paper_default(), 200, 9);
  const auto& a = m.proxy;
  const auto& b = back.proxy;
  const PosteriorMatrix pa = posteriors(a.mixture, s.data.z[0], s.data.z[1], s.data.z[2]);
  const PosteriorMatrix pb = posteriors(b.mixture, s.data.z[0], s.data.z[1], s.data.z[2]);
  CHECK((pa.weights - pb.weights).cwiseAbs().maxCoeff() <= 1e-12);
  for (double x : {-1.0, 0.0, 2.0}) {
    CHECK(std::abs(estimate_ate(a.causal, x) - estimate_ate(b.causal, x)) <= 1e-12);
    std::array<Eigen::RowVectorXd, 3> z{s.data.z[0].row(0), s.data.z[1].row(0), s.data.z[2].row(0)};
    for (int u = 0; u < 3; ++u) CHECK(std::abs(estimate_cate(a.outcome, u, x, z) - estimate_cate(b.outcome, u, x, z)) <= 1e-12);
  }
  const PosteriorMatrix ua = update_posteriors(pa, a.treatment, s.data);
  const PosteriorMatrix ub = update_posteriors(pb, b.treatment, s.data);
  CHECK((ua.weights - ub.weights).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.proxy.mixture.raw_priors == m.proxy.mixture.raw_priors);
  CHECK(back.proxy.mixture.lambdas == m.proxy.mixture.lambdas);
}

TEST_CASE("multitreatment model round-trip") {
  const SavedModel m = small_treatment_model();
  const std::string text = model_to_json(m);
  const SavedModel back = model_from_json(text);
  CHECK(model_to_json(back) == text);
  for (int a1 = 0; a1 < 5; ++a1) {
    const std::array<double, 3> a{double(a1), 2.0, 4.0 - a1};
    CHECK(std::abs(mt_ate(m.treatment, a) - mt_ate(back.treatment, a)) <= 1e-12);
    CHECK(std::abs(mt_cate(m.treatment, 1, a) - mt_cate(back.treatment, 1, a)) <= 1e-12);
  }
}

TEST_CASE("malformed models raise schema errors") {
  CHECK_THROWS_AS(model_from_json("not json"), SchemaError);
  CHECK_THROWS_AS(model_from_json("{}"), SchemaError);
  CHECK_THROWS_AS(model_from_json(R"({"schema_version": 99, "mode": "multiproxy"})"), SchemaError);
  std::string text = model_to_json(small_treatment_model());
  const auto pos = text.find("\"gamma\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 7, "\"gamm4\"");
  CHECK_THROWS_AS(model_from_json(text), SchemaError);
}

TEST_CASE("scenario configs match the built-in designs") {
  const ScenarioConfig p = load_scenario(config_path("paper-7.1.json"));
  const MultiProxyScenario ref = MultiProxyScenario::paper_default();
  CHECK(p.mode == Mode::multiproxy);
  CHECK(p.proxy.priors == ref.priors);
  for (int v = 0; v < 3; ++v) CHECK(p.proxy.means[v] == ref.means[v]);
  CHECK(p.proxy.alpha == ref.alpha);
  CHECK(p.proxy.sigma2 == ref.sigma2);
  CHECK(p.proxy.beta == ref.beta);
  CHECK(p.fit.kernel.rule == BandwidthRule::fixed);
  CHECK(p.fit.kernel.bandwidth == 1.0);

  const ScenarioConfig t = load_scenario(config_path("paper-7.2.json"));
  const MultiTreatmentScenario tref = MultiTreatmentScenario::paper_default();
  CHECK(t.mode == Mode::multitreatment);
  for (int v = 0; v < 3; ++v) CHECK((t.treatment.emissions[v] - tref.emissions[v]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.treatment.gamma == tref.gamma);

  const ScenarioConfig again = scenario_from_json(scenario_to_json(p));
  CHECK(scenario_to_json(again) == scenario_to_json(p));
  CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), IOError);
}

TEST_CASE("benchmark report layout") {
  ScenarioConfig cfg = builtin_scenario("paper-7.2");
  BenchmarkOptions opts;
  opts.ns = {600, 4};
  opts.trials = 3;
  opts.seed = 1;
  opts.threads = 2;
  const std::vector<BenchmarkRow> rows = run_benchmark(cfg, opts);
  int ok = 0, errors = 0;
  std::set<std::uint64_t> seeds;
  for (const auto& r : rows) {
    if (r.error.empty()) {
      ++ok;
      CHECK(r.aligned_abs_error == doctest::Approx(std::abs(r.estimate - r.truth)));
    } else {
      ++errors;
      CHECK(r.component == -1);
    }
    seeds.insert(r.seed);
  }
  // 2 components x 2 parameters per good trial, one row per failed trial.
  CHECK(ok % 4 == 0);
  CHECK(ok / 4 + errors == 6);
  CHECK(errors >= 1);
  CHECK(seeds.size() == 6);

  const std::string csv = benchmark_csv(rows);
  CHECK(csv.rfind("scenario,n,trial,seed,component,parameter,estimate,truth,aligned_abs_error,wall_ms", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rows.size()) + 1);

  // Thread count does not change the estimates.
  opts.threads = 1;
  const std::vector<BenchmarkRow> serial = run_benchmark(cfg, opts);
  REQUIRE(serial.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(serial[i].estimate == rows[i].estimate);
}

TEST_CASE("benchmark smoke run for the proxy design") {
  const ScenarioConfig cfg = builtin_scenario("paper-7.1");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<BenchmarkRow> rows = run_trial(cfg, 500, 0, trial_seed(0, 500, 0));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 60.0);
  CHECK(rows.size() == 6);
  const auto summary = summarize(rows);
  CHECK(summary.size() == 6);
}

TEST_CASE("median and quantile") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(quantile({0, 10}, 0.9) == doctest::Approx(9.0));
}
