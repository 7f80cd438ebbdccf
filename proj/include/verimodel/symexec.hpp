//===-- symexec.hpp - Forking symbolic executor ----------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Depth-first forking execution over an explicit worklist, true branch
// first. Branches whose condition involves symbolic state issue a
// feasibility query for each side; concrete branches execute directly.
// Symbolic array indices are expanded by case-split over the index domain,
// and divisions by a symbolic divisor fork a divide-by-zero error path.
// All counters are deterministic; only wall_time_ns varies between runs.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <vector>

#include "verimodel/ast.hpp"
#include "verimodel/interp.hpp"
#include "verimodel/solver.hpp"
#include "verimodel/symbol_spec.hpp"

namespace verimodel {

struct Limits {
  std::uint64_t max_paths = 100'000;
  std::uint64_t max_depth = 10'000;          // branch decisions per path
  std::uint64_t max_loop_iterations = 256;   // per loop, per path
  SolverLimits solver;                       // split cap, forwarded
};

struct PathStats {
  std::uint64_t paths_completed = 0;
  std::uint64_t paths_infeasible = 0;  // pruned by UNSAT
  std::uint64_t paths_truncated = 0;   // hit a limit
  std::uint64_t forks = 0;
  std::uint64_t queries = 0;
  std::uint64_t propagation_steps_total = 0;
  std::uint64_t instructions_executed = 0;
  std::uint64_t memory_accesses = 0;  // array loads + stores
  std::uint64_t arithmetic_ops = 0;
};

struct CostWeights {
  std::int64_t instruction = 1;
  std::int64_t memory = 10;
  std::int64_t fork = 50;
  std::int64_t propagation = 1;
};

struct PathError {
  Trap::Kind kind;
  SourceLoc loc;
};

struct CostReport {
  std::int64_t wall_time_ns = 0;
  std::int64_t deterministic_cost = 0;
  PathStats stats;
  std::vector<PathError> error_paths;       // completed error paths
  std::vector<SourceLoc> symbolic_loop_sites;  // loops that issued queries
  // Set when exactly one path completed and it returned a concrete value.
  std::optional<std::int64_t> single_concrete_return;
};

std::int64_t deterministic_cost(const PathStats& stats, const CostWeights& w);

// Runs the entry function of `p` under `spec`. The program must be valid
// and the spec must cover every entry parameter. Limits are never raised as
// errors; exhausted budgets are recorded in paths_truncated.
CostReport execute(const Program& p, const SymbolSpec& spec,
                   const Limits& limits = {}, const CostWeights& weights = {});

}  // namespace verimodel
