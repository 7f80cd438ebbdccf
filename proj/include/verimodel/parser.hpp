//===-- parser.hpp - MiniC lexer and recursive-descent parser -------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <string>
#include <string_view>

#include "verimodel/ast.hpp"
#include "verimodel/errors.hpp"

namespace verimodel {

// Parses MiniC source text into a Program. The grammar is documented in
// docs/minilang.md. The entry function defaults to the first function in
// the file. Throws ParseError with line/column and an expected-token
// message on malformed input.
Program parse_program(std::string_view source);

// Reads a file and parses it; throws ConfigError if the file cannot be read.
Program parse_file(const std::string& path);

// Canonical source form. print(parse(s)) re-parses to a structurally
// identical program, and printing is byte-for-byte deterministic.
std::string print_program(const Program& p);
std::string print_expr(const Expr& e);

// Parses a standalone expression (used by the solver CLI and tests).
ExprRef parse_expr_text(std::string_view source);

}  // namespace verimodel
