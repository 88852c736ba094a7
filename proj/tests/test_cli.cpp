#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"
#include "tensorcate/benchmark.hpp"
#include "tensorcate/io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

using namespace tensorcate;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("tensorcate_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  const std::string out = path("stdout.txt"), err = path("stderr.txt");
  const std::string cmd = std::string(TENSORCATE_CLI) + " " + args + " > " + out + " 2> " + err;
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// A multiproxy model whose outcome stage holds the true coefficients and
// whose feature expectations come from oracle posteriors.
std::string truth_model(bool zero_beta) {
  const ScenarioConfig cfg = builtin_scenario("paper-7.1");
  const MultiProxySample s = simulate_multiproxy(cfg.proxy, 800, 3);
  FitSettings fit = cfg.fit;
  fit.kernel.landmark_count = 200;
  SavedModel m;
  m.mode = Mode::multiproxy;
  m.kernel = fit.kernel;
  m.proxy = fit_multiproxy(s.data, proxy_options(fit, 3, 0));
  m.proxy.outcome.beta = zero_beta ? Eigen::MatrixXd::Zero(3, 5) : cfg.proxy.beta;
  const PosteriorMatrix w = oracle_posteriors(cfg.proxy, s.data, PosteriorFlavor::proxy_only);
  m.proxy.mixture.priors = cfg.proxy.priors;
  m.proxy.causal = make_causal_estimate(cfg.proxy.priors, m.proxy.outcome, s.data, w);
  return model_to_json(m);
}

}  // namespace

TEST_CASE("simulate writes the dataset and truth sidecar deterministically") {
  Run r = cli("simulate multiproxy --n 100 --seed 7 --out " + path("d.csv"));
  REQUIRE(r.code == 0);
  const std::string first = slurp(path("d.csv"));
  CHECK(line_count(first) == 101);
  CHECK(fs::exists(path("d.truth.json")));
  const std::string truth = slurp(path("d.truth.json"));
  CHECK(nlohmann::json::parse(truth).contains("labels"));

  REQUIRE(cli("simulate multiproxy --n 100 --seed 7 --out " + path("d.csv")).code == 0);
  CHECK(slurp(path("d.csv")) == first);
  CHECK(slurp(path("d.truth.json")) == truth);

  REQUIRE(cli("simulate multiproxy --n 0 --seed 7 --out " + path("empty.csv")).code == 0);
  CHECK(line_count(slurp(path("empty.csv"))) == 1);

  REQUIRE(cli("simulate multitreatment --scenario paper-7.2 --n 50 --seed 1 --out " + path("t.csv")).code == 0);
  CHECK(slurp(path("t.csv")).rfind("a1,a2,a3,y\n", 0) == 0);
}

TEST_CASE("fit produces a normalized, reproducible model") {
  REQUIRE(cli("simulate multiproxy --n 800 --seed 2 --out " + path("fit.csv")).code == 0);
  const std::string args = "fit multiproxy --input " + path("fit.csv") + " --config paper-7.1 --landmarks 200 --seed 4 --out ";
  Run r = cli(args + path("m1.json"));
  REQUIRE(r.code == 0);
  const nlohmann::json model = nlohmann::json::parse(slurp(path("m1.json")));
  double total = 0.0;
  int count = 0;
  std::function<void(const nlohmann::json&)> find = [&](const nlohmann::json& j) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "priors" && it->is_array() && count == 0) {
        for (const auto& p : *it) total += p.get<double>();
        count = static_cast<int>(it->size());
      }
      find(*it);
    }
  };
  find(model);
  CHECK(count == 3);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

  REQUIRE(cli(args + path("m2.json")).code == 0);
  CHECK(slurp(path("m1.json")) == slurp(path("m2.json")));

  REQUIRE(cli("fit multitreatment --input " + path("t.csv") + " --k 2 --out " + path("mt.json")).code == 0);
}

TEST_CASE("fit reports a degenerate spectrum with exit code 2") {
  REQUIRE(cli("simulate multiproxy --n 300 --seed 2 --out " + path("small.csv")).code == 0);
  const Run r = cli("fit multiproxy --input " + path("small.csv") + " --k 9 --landmarks 8 --out " + path("bad.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("degenerate spectrum at k=9") != std::string::npos);
  CHECK(r.err.find("mixture learning") != std::string::npos);
}

TEST_CASE("estimate on a truth model") {
  write_file(path("truth_model.json"), truth_model(false));
  Run r = cli("estimate --model " + path("truth_model.json") + " ate --a 0 1 2");
  REQUIRE(r.code == 0);
  const nlohmann::json out = nlohmann::json::parse(r.out);
  CHECK(out["estimand"] == "ate");
  const auto values = out["value"].get<std::vector<double>>();
  REQUIRE(values.size() == 3);
  CHECK(values[1] - values[0] == doctest::Approx(1.855).epsilon(1e-10));
  CHECK(values[2] - values[1] == doctest::Approx(1.855).epsilon(1e-10));
  CHECK(out.contains("per_component"));

  write_file(path("zero_model.json"), truth_model(true));
  r = cli("estimate --model " + path("zero_model.json") + " cate --u 2 --a 1.5 --z 1 2 3 4 5 6 7 8 9");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["value"].get<double>() == 0.0);
}

TEST_CASE("error exit codes") {
  write_file(path("broken.json"), "{\"schema_version\": 1, \"mode\": \"multiproxy\"");
  Run r = cli("estimate --model " + path("broken.json") + " ate --a 1");
  CHECK(r.code == 2);
  CHECK(r.err.find("schema") != std::string::npos);

  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("simulate multiproxy --out " + path("x.csv")).code == 1);
  CHECK(cli("fit multiproxy --input " + path("missing.csv") + " --out " + path("x.json")).code != 0);
}

TEST_CASE("rank selects the planted number of components") {
  REQUIRE(cli("simulate multiproxy --n 2000 --seed 11 --out " + path("r.csv")).code == 0);
  Run r = cli("rank --input " + path("r.csv") + " --config paper-7.1 --max-k 10");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("selected K: 3") != std::string::npos);
  CHECK(line_count(slurp(path("r.csv") + ".scree.csv")) == 11);

  REQUIRE(cli("simulate multitreatment --scenario paper-7.2 --n 5000 --seed 1 --out " + path("rt.csv")).code == 0);
  r = cli("rank --input " + path("rt.csv") + " --max-k 5 --csv " + path("rt_scree.csv"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("selected K: 2") != std::string::npos);

  r = cli("rank --input " + path("small.csv") + " --config paper-7.1 --landmarks 8 --max-k 500");
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("benchmark writes a report") {
  const Run r = cli("benchmark --scenario paper-7.2 --ns 800 --trials 2 --seed 3 --threads 1 --out " + path("b.csv"));
  REQUIRE(r.code == 0);
  const std::string csv = slurp(path("b.csv"));
  CHECK(line_count(csv) == 1 + 2 * 2 * 2);
  CHECK(r.out.find("median") != std::string::npos);
}

TEST_CASE("cleanup") {
  std::error_code ec;
  fs::remove_all(workdir(), ec);
  CHECK_FALSE(ec);
}
