//===-- validate.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/validate.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "verimodel/errors.hpp"

namespace verimodel {

const char* to_string(DiagCategory c) {
  switch (c) {
    case DiagCategory::UndefinedVariable: return "undefined-variable";
    case DiagCategory::MissingReturn: return "missing-return";
    case DiagCategory::DuplicateName: return "duplicate-name";
    case DiagCategory::UnknownCallee: return "unknown-callee";
    case DiagCategory::TypeMismatch: return "type-mismatch";
    case DiagCategory::RecursiveCall: return "recursive-call";
  }
  return "?";
}

namespace {

using Assigned = std::set<std::string>;

class FunctionChecker {
 public:
  FunctionChecker(const Program& program, const Function& f,
                  std::vector<Diagnostic>& diags)
      : program_(program), f_(f), diags_(diags) {
    for (const auto& p : f.params) {
      if (p.is_array()) {
        arrays_.insert(p.name);
      } else {
        scalars_.insert(p.name);
      }
    }
  }

  void run() {
    Assigned assigned = scalars_;
    check_block(f_.body, assigned);
    if (!block_returns(f_.body)) {
      diag(f_.loc, DiagCategory::MissingReturn,
           "not every path through '" + f_.name + "' ends in a return");
    }
  }

 private:
  void diag(SourceLoc loc, DiagCategory cat, std::string msg) {
    diags_.push_back({loc, cat, std::move(msg)});
  }

  bool is_array(const std::string& name) const { return arrays_.count(name) > 0; }

  void check_expr(const Expr& e, const Assigned& assigned) {
    std::visit(
        Overload{
            [](const IntLit&) {},
            [&](const VarRef& x) {
              if (is_array(x.name)) {
                diag(e.loc, DiagCategory::TypeMismatch,
                     "array '" + x.name + "' used as a scalar value");
              } else if (!assigned.count(x.name)) {
                diag(e.loc, DiagCategory::UndefinedVariable,
                     "variable '" + x.name + "' used before assignment");
              }
            },
            [&](const ArrayLoad& x) {
              if (!is_array(x.array)) {
                if (scalars_.count(x.array) || assigned.count(x.array)) {
                  diag(e.loc, DiagCategory::TypeMismatch,
                       "'" + x.array + "' is not an array");
                } else {
                  diag(e.loc, DiagCategory::UndefinedVariable,
                       "unknown array '" + x.array + "'");
                }
              }
              check_expr(*x.index, assigned);
            },
            [&](const UnaryExpr& x) { check_expr(*x.operand, assigned); },
            [&](const BinaryExpr& x) {
              check_expr(*x.lhs, assigned);
              check_expr(*x.rhs, assigned);
            },
        },
        e.node);
  }

  void check_assign_target(const std::string& name, SourceLoc loc,
                           Assigned& assigned) {
    if (is_array(name)) {
      diag(loc, DiagCategory::TypeMismatch,
           "cannot assign to array '" + name + "' as a whole");
      return;
    }
    if (loop_vars_.count(name)) {
      diag(loc, DiagCategory::TypeMismatch,
           "loop variable '" + name + "' is read-only inside its loop");
      return;
    }
    assigned.insert(name);
  }

  // Walks a block updating the definitely-assigned set in place.
  void check_block(const Block& b, Assigned& assigned) {
    for (const auto& s : b) check_stmt(*s, assigned);
  }

  void check_stmt(const Stmt& s, Assigned& assigned) {
    std::visit(
        Overload{
            [&](const Assign& x) {
              check_expr(*x.value, assigned);
              check_assign_target(x.name, s.loc, assigned);
            },
            [&](const ArrayStore& x) {
              check_expr(*x.index, assigned);
              check_expr(*x.value, assigned);
              if (!is_array(x.array)) {
                if (scalars_.count(x.array) || assigned.count(x.array)) {
                  diag(s.loc, DiagCategory::TypeMismatch,
                       "'" + x.array + "' is not an array");
                } else {
                  diag(s.loc, DiagCategory::UndefinedVariable,
                       "unknown array '" + x.array + "'");
                }
              }
            },
            [&](const If& x) {
              check_expr(*x.cond, assigned);
              Assigned then_set = assigned;
              check_block(x.then_body, then_set);
              Assigned else_set = assigned;
              check_block(x.else_body, else_set);
              // Only variables assigned on both branches survive the join.
              Assigned merged;
              std::set_intersection(then_set.begin(), then_set.end(),
                                    else_set.begin(), else_set.end(),
                                    std::inserter(merged, merged.end()));
              assigned = std::move(merged);
            },
            [&](const While& x) {
              check_expr(*x.cond, assigned);
              Assigned body_set = assigned;  // body may run zero times
              check_block(x.body, body_set);
            },
            [&](const For& x) {
              check_expr(*x.lo, assigned);
              check_expr(*x.hi, assigned);
              if (assigned.count(x.var) || arrays_.count(x.var)) {
                diag(s.loc, DiagCategory::DuplicateName,
                     "loop variable '" + x.var + "' shadows an existing variable");
              }
              Assigned body_set = assigned;
              body_set.insert(x.var);
              loop_vars_.insert(x.var);
              check_block(x.body, body_set);
              loop_vars_.erase(x.var);
            },
            [&](const Return& x) { check_expr(*x.value, assigned); },
            [&](const CallAssign& x) {
              const Function* callee = program_.find_function(x.callee);
              if (!callee) {
                diag(s.loc, DiagCategory::UnknownCallee,
                     "call to undefined function '" + x.callee + "'");
              } else if (callee->params.size() != x.args.size()) {
                diag(s.loc, DiagCategory::TypeMismatch,
                     "'" + x.callee + "' expects " +
                         std::to_string(callee->params.size()) +
                         " arguments, got " + std::to_string(x.args.size()));
              }
              for (std::size_t i = 0; i < x.args.size(); ++i) {
                const Param* cp = callee && i < callee->params.size()
                                      ? &callee->params[i]
                                      : nullptr;
                const Expr& arg = *x.args[i];
                const auto* var = std::get_if<VarRef>(&arg.node);
                bool arg_is_array = var && is_array(var->name);
                if (cp && cp->is_array()) {
                  if (!arg_is_array) {
                    diag(arg.loc, DiagCategory::TypeMismatch,
                         "argument " + std::to_string(i + 1) + " of '" +
                             x.callee + "' must be an array of length " +
                             std::to_string(*cp->array_length));
                  } else if (f_.find_param(var->name)->array_length !=
                             cp->array_length) {
                    diag(arg.loc, DiagCategory::TypeMismatch,
                         "array length mismatch for argument " +
                             std::to_string(i + 1) + " of '" + x.callee + "'");
                  }
                } else if (arg_is_array) {
                  diag(arg.loc, DiagCategory::TypeMismatch,
                       "array '" + var->name + "' passed where a scalar is "
                       "expected");
                } else {
                  check_expr(arg, assigned);
                }
              }
              check_assign_target(x.target, s.loc, assigned);
            },
        },
        s.node);
  }

  static bool stmt_returns(const Stmt& s) {
    return std::visit(Overload{
                          [](const Return&) { return true; },
                          [](const If& x) {
                            return !x.else_body.empty() &&
                                   block_returns(x.then_body) &&
                                   block_returns(x.else_body);
                          },
                          [](const auto&) { return false; },
                      },
                      s.node);
  }

  static bool block_returns(const Block& b) {
    return std::any_of(b.begin(), b.end(),
                       [](const StmtRef& s) { return stmt_returns(*s); });
  }

  const Program& program_;
  const Function& f_;
  std::vector<Diagnostic>& diags_;
  Assigned scalars_;
  std::set<std::string> arrays_;
  std::set<std::string> loop_vars_;
};

void collect_callees(const Block& b, std::vector<std::pair<std::string, SourceLoc>>& out) {
  for (const auto& s : b) {
    std::visit(Overload{
                   [&](const CallAssign& x) { out.push_back({x.callee, s->loc}); },
                   [&](const If& x) {
                     collect_callees(x.then_body, out);
                     collect_callees(x.else_body, out);
                   },
                   [&](const While& x) { collect_callees(x.body, out); },
                   [&](const For& x) { collect_callees(x.body, out); },
                   [](const auto&) {},
               },
               s->node);
  }
}

void check_recursion(const Program& p, std::vector<Diagnostic>& diags) {
  std::unordered_map<std::string, std::vector<std::pair<std::string, SourceLoc>>> calls;
  for (const auto& f : p.functions) collect_callees(f.body, calls[f.name]);

  enum class Mark { White, Grey, Black };
  std::unordered_map<std::string, Mark> mark;
  for (const auto& f : p.functions) mark[f.name] = Mark::White;

  // DFS; a call edge into a grey function closes a cycle.
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    mark[name] = Mark::Grey;
    for (const auto& [callee, loc] : calls[name]) {
      auto it = mark.find(callee);
      if (it == mark.end()) continue;  // undefined callee reported elsewhere
      if (it->second == Mark::Grey) {
        diags.push_back({loc, DiagCategory::RecursiveCall,
                         "recursive call to '" + callee + "' (recursion is not "
                         "supported)"});
      } else if (it->second == Mark::White) {
        visit(callee);
      }
    }
    mark[name] = Mark::Black;
  };
  for (const auto& f : p.functions) {
    if (mark[f.name] == Mark::White) visit(f.name);
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Program& p) {
  std::vector<Diagnostic> diags;

  std::unordered_set<std::string> names;
  for (const auto& f : p.functions) {
    if (!names.insert(f.name).second) {
      diags.push_back({f.loc, DiagCategory::DuplicateName,
                       "duplicate function name '" + f.name + "'"});
    }
    std::unordered_set<std::string> pnames;
    for (const auto& param : f.params) {
      if (!pnames.insert(param.name).second) {
        diags.push_back({f.loc, DiagCategory::DuplicateName,
                         "duplicate parameter '" + param.name + "' in '" +
                             f.name + "'"});
      }
    }
  }

  if (!p.find_function(p.entry)) {
    diags.push_back({{0, 0}, DiagCategory::UnknownCallee,
                     "entry function '" + p.entry + "' is not defined"});
  }

  for (const auto& f : p.functions) {
    FunctionChecker(p, f, diags).run();
  }
  check_recursion(p, diags);
  return diags;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    out += std::to_string(d.loc.line) + ":" + std::to_string(d.loc.col) + ": " +
           to_string(d.category) + ": " + d.message + "\n";
  }
  return out;
}

void require_valid(const Program& p) {
  auto diags = validate(p);
  if (!diags.empty()) {
    throw ToolError(ErrorKind::Frontend,
                    "program is not well formed:\n" + format_diagnostics(diags));
  }
}

}  // namespace verimodel
