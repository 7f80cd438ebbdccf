//===-- errors.hpp - Error types shared across the toolkit ----------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "verimodel/ast.hpp"

namespace verimodel {

// Exit-code categories used by the CLI (documented in the README):
//   0 ok, 2 config, 3 parse/validate, 4 runtime limit, 5 fitting.
enum class ErrorKind { Config, Frontend, RuntimeLimit, Fitting };

struct ToolError : std::runtime_error {
  ErrorKind kind;
  ToolError(ErrorKind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

struct ParseError : ToolError {
  SourceLoc loc;
  ParseError(SourceLoc l, const std::string& msg)
      : ToolError(ErrorKind::Frontend,
                  std::to_string(l.line) + ":" + std::to_string(l.col) + ": " + msg),
        loc(l) {}
};

struct ConfigError : ToolError {
  explicit ConfigError(const std::string& msg) : ToolError(ErrorKind::Config, msg) {}
};

struct FittingError : ToolError {
  explicit FittingError(const std::string& msg)
      : ToolError(ErrorKind::Fitting, msg) {}
};

struct RankDeficientError : FittingError {
  std::vector<std::string> columns;
  RankDeficientError(std::vector<std::string> cols, const std::string& msg)
      : FittingError(msg), columns(std::move(cols)) {}
};

struct LimitError : ToolError {
  explicit LimitError(const std::string& msg)
      : ToolError(ErrorKind::RuntimeLimit, msg) {}
};

}  // namespace verimodel
