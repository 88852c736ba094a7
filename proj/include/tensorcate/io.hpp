#pragma once

// Dataset CSV, model JSON and scenario config persistence.

#include "tensorcate/datagen.hpp"
#include "tensorcate/multiproxy.hpp"
#include "tensorcate/multitreatment.hpp"

#include <cstdint>
#include <string>

namespace tensorcate {

inline constexpr int kModelSchemaVersion = 1;

enum class Mode { multiproxy, multitreatment };
std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

// ---- datasets -------------------------------------------------------------

/// Header z1_0..z1_{d-1}, z2_*, z3_*, a, y. Values use 17 significant digits.
std::string multiproxy_csv(const MultiProxyData& data);
/// Header a1, a2, a3, y.
std::string multitreatment_csv(const MultiTreatmentData& data);

/// Throws SchemaError on a header that does not match the mode, ragged rows
/// or non-finite values. `levels` <= 0 infers max level + 1.
MultiProxyData parse_multiproxy_csv(const std::string& text);
MultiTreatmentData parse_multitreatment_csv(const std::string& text, int levels = 0);

/// Mode from the header of a dataset.
Mode detect_csv_mode(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// ---- models ---------------------------------------------------------------

struct FitSettings {
  int k = 0;  // 0: take from the scenario
  KernelSpec kernel;
  PowerMethodOptions power;
  bool symmetric_views = false;
  std::vector<std::string> treatment_terms;  // empty: default map
  std::vector<std::string> outcome_terms;    // empty: default map
  std::vector<std::string> xi_terms;         // empty: [1, a1, a2, a3]
  double ridge = 0.0;
  int holdout = 1000;
};

struct SavedModel {
  Mode mode = Mode::multiproxy;
  std::uint64_t seed = 0;
  KernelSpec kernel;  // as requested (rule and parameters)
  MultiProxyFit proxy;
  MultiTreatmentModel treatment;
};

std::string model_to_json(const SavedModel& model);
/// Throws SchemaError on malformed documents.
SavedModel model_from_json(const std::string& text);

// ---- scenarios ------------------------------------------------------------

struct ScenarioConfig {
  std::string name;
  Mode mode = Mode::multiproxy;
  MultiProxyScenario proxy;
  MultiTreatmentScenario treatment;
  FitSettings fit;
};

/// "paper-7.1" and "paper-7.2" resolve to the built-in designs with their
/// recommended fit settings; anything else is read as a config file path.
ScenarioConfig load_scenario(const std::string& name_or_path);
ScenarioConfig builtin_scenario(const std::string& name);
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);

/// Ground-truth sidecar: scenario parameters and the drawn labels.
std::string truth_to_json(const ScenarioConfig& config, Eigen::Index n, std::uint64_t seed,
                          const Eigen::VectorXi& labels);

}  // namespace tensorcate
