//===-- pipeline.hpp - End-to-end orchestration -------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Runs the full chain: optimize -> extract features -> design ->
// instantiate -> run -> screen -> fit -> assess, writing one artifact per
// stage. Every random choice derives from the single top-level seed via
// derive_seed(seed, stage name), so a config and a seed reproduce every
// artifact byte for byte (wall-clock columns excepted, and excluded
// entirely under `deterministic`).
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verimodel/assess.hpp"
#include "verimodel/doe.hpp"
#include "verimodel/gp.hpp"
#include "verimodel/model_io.hpp"
#include "verimodel/optimizer.hpp"

namespace verimodel {

struct PipelineConfig {
  std::string program_path;
  std::string spec_path;
  std::string factors_path;
  std::string design_kind = "full";  // "full" | "frac:<p>" | "pb"
  std::string entry;                 // optional override of the entry function
  std::string response = "deterministic_cost";
  std::string fit_kind = "linear";   // "linear" | "gp"
  // Feature columns for fitting; empty means "use the screened factors".
  std::vector<std::string> fit_features;
  // Fit log(1+response) instead of the raw response; assessments are then
  // on the transformed scale, the ranking back-transforms its prediction.
  bool log_response = false;
  double test_fraction = 0.25;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  ScreenPolicy screen_policy;  // default: threshold 0
  int replicates = 0;          // 0 = auto: 1, or 3 when response is wall time
  Limits limits;
  OptConfig opt;
  CostWeights weights;
  GPConfig gp;  // population etc.; the seed field is derived, not read
  std::string out_dir = "out";
  std::string ranking_path;  // defaults to <out_dir>/ranking.csv
  // Nominal feature point for the ranking entry; missing features default
  // to their column mean over the observation table.
  std::map<std::string, double> nominal;
  bool deterministic = false;  // drop wall_time_ns from artifacts
  int jobs = 1;
  std::vector<std::string> variant_paths;  // static-feature program variants
};

PipelineConfig pipeline_config_from_json_text(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineResult {
  std::string design_path;
  std::string features_path;
  std::string observations_path;
  std::string screening_path;
  std::string model_path;
  std::string assessment_path;
  std::vector<std::string> screened_factors;
  Model model;
  AssessmentReport assessment;
  double predicted_at_nominal = 0.0;
  std::string entry_name;
};

// Executes all stages; any failure carries a "stage '<name>':" prefix and
// leaves the artifacts of earlier stages intact.
PipelineResult run_pipeline(const PipelineConfig& config);

// Human-readable summary: model formula, error statistics, coverage.
std::string format_report(const AssessmentReport& report, const Model& model,
                          const std::string& response);

struct RankingEntry {
  std::string function;
  std::string model_kind;
  double predicted_cost = 0.0;
  double mape = 0.0;
  double rmse = 0.0;
  double r_squared_test = 0.0;
  std::optional<double> interval_coverage;
  std::uint64_t seed = 0;
};

// Appends (or replaces, by function name) one entry and keeps the file
// sorted descending by predicted cost.
void append_ranking(const std::string& path, const RankingEntry& entry);
std::vector<RankingEntry> read_ranking(const std::string& path);

// Creates a header-only ranking CSV when none exists yet.
void ensure_ranking_file(const std::string& path);

}  // namespace verimodel
