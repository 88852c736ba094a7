#pragma once

// Repeated seeded trials of a scenario across sample sizes, aligned to the
// ground truth and reported one row per (trial, component, parameter).

#include "tensorcate/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tensorcate {

struct BenchmarkRow {
  std::string scenario;
  Eigen::Index n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  int component = -1;  // -1 on error rows
  std::string parameter;
  double estimate = 0.0;
  double truth = 0.0;
  double aligned_abs_error = 0.0;
  double wall_ms = 0.0;
  std::string error;  // empty unless the trial failed
};

struct BenchmarkOptions {
  std::vector<Eigen::Index> ns;
  int trials = 20;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: default_thread_count()
};

/// Worker count from TENSORCATE_THREADS, else the number of logical cores.
int default_thread_count();

/// Seed of trial `trial` at sample size n.
std::uint64_t trial_seed(std::uint64_t seed, Eigen::Index n, int trial);

/// Tracked parameters:
///   multiproxy:     beta_a (coefficient on a), prior
///   multitreatment: gamma_norm, prior
/// Components are aligned to the truth by their outcome coefficient rows.
std::vector<BenchmarkRow> run_benchmark(const ScenarioConfig& config, const BenchmarkOptions& opts);

/// One trial; failures become a single error row.
std::vector<BenchmarkRow> run_trial(const ScenarioConfig& config, Eigen::Index n, int trial, std::uint64_t seed);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

struct BenchmarkSummary {
  Eigen::Index n = 0;
  std::string parameter;
  int component = 0;
  int count = 0;
  double median_abs_error = 0.0;
  double q90_abs_error = 0.0;
  double median_estimate = 0.0;
  double truth = 0.0;
};

std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

/// Options for fitting a dataset with the given settings.
MultiProxyOptions proxy_options(const FitSettings& fit, int d, std::uint64_t seed);
MultiTreatmentOptions treatment_options(const FitSettings& fit, std::uint64_t seed);

}  // namespace tensorcate
