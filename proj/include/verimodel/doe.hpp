//===-- doe.hpp - Two-level experimental designs ----------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Screening designs over two-level factors: full factorials, regular
// fractional factorials, and the 12-run Plackett-Burman design. Coded
// levels -1/+1 decode onto symbolic-input specs, program variants, and
// executor limits; main effects and a screening rule pick the factors
// worth modeling.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verimodel/csv.hpp"
#include "verimodel/errors.hpp"
#include "verimodel/symbol_spec.hpp"
#include "verimodel/symexec.hpp"

namespace verimodel {

struct TooManyFactorsError : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidFractionError : ConfigError {
  using ConfigError::ConfigError;
};
struct LengthMismatchError : ConfigError {
  using ConfigError::ConfigError;
};
struct UnresolvableFactorError : ConfigError {
  using ConfigError::ConfigError;
};

enum class FactorSource {
  ScalarValue,   // concrete scalar parameter value
  DomainWidth,   // symbolic scalar domain [0, w-1]
  ArraySize,     // array parameter length (symbolic arrays)
  LoopCap,       // executor max_loop_iterations
  StaticFeature, // selects among pre-built program variants
};

const char* to_string(FactorSource s);

struct Factor {
  std::string name;
  FactorSource source = FactorSource::ScalarValue;
  std::string param;  // parameter name, or feature label for StaticFeature
  std::int64_t low = 0;
  std::int64_t high = 1;
};

std::vector<Factor> factors_from_json_text(const std::string& text);
std::vector<Factor> load_factors(const std::string& path);

struct DesignMatrix {
  std::vector<Factor> factors;
  std::vector<std::vector<int>> rows;  // entries are -1 or +1
  std::string kind;
};

// 2^k runs in lexicographic order (row 0 all -1), k <= 16.
DesignMatrix full_factorial(const std::vector<Factor>& factors);

// 12 runs from the standard generator row, cyclically shifted, plus the
// all-minus row; up to 11 factors.
DesignMatrix plackett_burman(const std::vector<Factor>& factors);

// 2^(k-p) runs: the last p columns are products of distinct subsets of the
// basis columns, chosen largest-cardinality first (then lexicographic).
DesignMatrix fractional_factorial(const std::vector<Factor>& factors, int p);

struct ExperimentTemplate {
  Program program;
  SymbolSpec base_spec;
  Limits limits;
  std::vector<Program> variants;  // indexed by StaticFeature levels
};

struct Experiment {
  std::size_t run_index = 0;
  Program program;
  SymbolSpec spec;
  Limits limits;
  // Decoded settings in factor declaration order.
  std::vector<std::pair<std::string, std::int64_t>> settings;
};

std::vector<Experiment> instantiate(const DesignMatrix& design,
                                    const ExperimentTemplate& tmpl);

// effect(f) = mean(response | f = +1) - mean(response | f = -1), in factor
// declaration order.
std::vector<std::pair<std::string, double>> main_effects(
    const DesignMatrix& design, const std::vector<double>& responses);

struct ScreenPolicy {
  std::optional<double> threshold;
  std::optional<std::size_t> top_k;
};

struct ScreenResult {
  std::vector<std::string> selected;
  std::string warning;  // set when all effects are exactly zero
};

// Keeps factors with |effect| >= threshold (or the top_k largest), ties
// broken by declaration order; returns at least one factor unless every
// effect is exactly zero.
ScreenResult screen(const std::vector<std::pair<std::string, double>>& effects,
                    const ScreenPolicy& policy);

struct Observation {
  std::size_t run_index = 0;
  std::vector<std::pair<std::string, std::int64_t>> settings;
  std::int64_t wall_time_ns = 0;
  std::int64_t deterministic_cost = 0;
  std::int64_t paths_completed = 0;
  std::int64_t queries = 0;
  std::int64_t propagation_steps_total = 0;
  std::string status = "ok";  // ok | truncated | error
};

Observation observe(const Experiment& e, const CostReport& report);

CsvTable design_to_csv(const DesignMatrix& design);
// Column order: run_index, decoded factor settings, wall_time_ns (unless
// deterministic mode), deterministic_cost, paths_completed, queries,
// propagation_steps_total, status.
CsvTable observations_to_csv(const std::vector<std::string>& factor_names,
                             const std::vector<Observation>& observations,
                             bool include_wall_time);

// Runs every experiment, in parallel up to `jobs` threads; observations are
// returned in run_index order regardless of completion order.
std::vector<Observation> run_experiments(const std::vector<Experiment>& experiments,
                                         const CostWeights& weights, int jobs);

}  // namespace verimodel
