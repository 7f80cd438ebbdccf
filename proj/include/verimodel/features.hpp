//===-- features.hpp - Static code/input features --------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// White-box analysis: cyclomatic complexity, symbolic-loop and symbolic-
// branch statistics, parameter counts and sizes. All functions here are
// pure; feature extraction is intended to run over optimized code.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "verimodel/ast.hpp"
#include "verimodel/symbol_spec.hpp"

namespace verimodel {

struct BranchInfo {
  SourceLoc location;
  bool is_symbolic = false;               // condition reads symbolic state
  std::optional<bool> is_linear;          // defined only when is_symbolic
};

struct LoopInfo {
  SourceLoc location;
  bool is_symbolic = false;               // trip count depends on symbolic state
  std::size_t body_instruction_count = 0; // IR nodes in the loop body
};

struct FeatureVector {
  std::size_t cc = 1;
  std::size_t n_sym_loops = 0;
  std::size_t sym_loop_body_total = 0;
  std::size_t sym_loop_body_max = 0;
  std::size_t n_sym_branches_linear = 0;
  std::size_t n_sym_branches_nonlinear = 0;
  std::size_t n_sym_params = 0;
  std::int64_t array_size_total = 0;
  std::int64_t array_size_max = 0;
  std::map<std::string, std::int64_t> scalar_values;  // concrete scalars
  std::map<std::string, std::int64_t> domain_widths;  // symbolic scalars
};

// 1 + #if + #loops + #(&& / ||) operators inside if and while conditions.
std::size_t cyclomatic_complexity(const Function& f);

// Variables whose value can depend on a symbolic parameter, computed by
// forward taint propagation to a fixpoint (flow-insensitive, conservative).
// Array names are tainted as a whole.
std::set<std::string> tainted_vars(const Function& f, const SymbolSpec& spec);

// Classifies one branch condition. A symbolic condition is linear iff every
// relational atom in it compares expressions that are affine in symbolic
// state: no product of two symbolic subexpressions and no division or
// modulo by a symbolic divisor. Array loads with symbolic index or from a
// symbolic array count as opaque degree-one terms.
BranchInfo classify_branch(const Expr& cond, const SymbolSpec& spec,
                           const Function& f);

// One entry per while/for node, in pre-order.
std::vector<LoopInfo> analyze_loops(const Function& f, const SymbolSpec& spec);

FeatureVector extract_features(const Function& f, const SymbolSpec& spec);

// Fixed, documented CSV column order: the nine aggregate counters, then the
// named scalar/domain columns ("scalar.<param>", "width.<param>") sorted by
// column name.
std::vector<std::pair<std::string, std::int64_t>> feature_columns(
    const FeatureVector& fv);

}  // namespace verimodel
