//===-- validate.hpp - Program well-formedness checks ---------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <string>
#include <vector>

#include "verimodel/ast.hpp"

namespace verimodel {

enum class DiagCategory {
  UndefinedVariable,
  MissingReturn,
  DuplicateName,
  UnknownCallee,
  TypeMismatch,
  RecursiveCall,
};

const char* to_string(DiagCategory c);

struct Diagnostic {
  SourceLoc loc;
  DiagCategory category;
  std::string message;
};

// Returns an empty list iff the program is well formed: unique names, all
// callees defined with matching signatures, no recursion, every variable
// definitely assigned before use, and every path through each body ending
// in a return.
std::vector<Diagnostic> validate(const Program& p);

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

// Convenience: validate and throw a frontend ToolError on any diagnostic.
void require_valid(const Program& p);

}  // namespace verimodel
