//===-- optimizer.hpp - Verification-oriented IR transformations ----------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "verimodel/ast.hpp"

namespace verimodel {

enum class PassKind {
  ConstantFold,
  ConstantPropagate,
  DeadCodeEliminate,
  UnrollConcreteLoops,
  Inline,
};

const char* to_string(PassKind p);

struct OptConfig {
  // Default pipeline: all five passes in this order.
  std::vector<PassKind> passes{
      PassKind::ConstantFold, PassKind::ConstantPropagate,
      PassKind::DeadCodeEliminate, PassKind::UnrollConcreteLoops,
      PassKind::Inline};
  std::int64_t max_body_copies = 64;  // unroll budget, >= 1
  int max_depth = 16;                 // inline nesting budget, >= 1

  // Parses a comma-separated pass list, e.g. "constant-fold,inline".
  static OptConfig from_names(const std::string& names);
};

struct OptNote {
  std::string pass;
  SourceLoc loc;
  std::string message;
};

// Applies the configured pass sequence and then re-runs the non-inlining
// passes until the program stops changing (bounded number of rounds), so
// the result is a fixpoint of the pipeline. Semantics over concrete inputs
// are preserved, including divide-by-zero and out-of-bounds traps. Skipped
// unrollings and inline-budget hits are reported through `notes`.
Program optimize(const Program& p, const OptConfig& config,
                 std::vector<OptNote>* notes = nullptr);

struct PassTraceEntry {
  std::string pass;
  std::size_t size_before = 0;
  std::size_t size_after = 0;
};

// Runs each configured pass exactly once, recording IR node counts before
// and after. Diagnostic companion to optimize(); its final program can
// differ from optimize()'s fixpoint.
std::vector<PassTraceEntry> pass_trace(const Program& p, const OptConfig& config,
                                       std::vector<OptNote>* notes = nullptr);

}  // namespace verimodel
