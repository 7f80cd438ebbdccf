//===-- printer.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include <string>

#include "verimodel/ast.hpp"
#include "verimodel/parser.hpp"

namespace verimodel {

namespace {

int prec_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 3;
    case BinaryOp::Lt:
    case BinaryOp::Le: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 6;
  }
  return 0;
}

constexpr int kUnaryPrec = 7;

void print_expr_into(const Expr& e, int parent_prec, std::string& out) {
  std::visit(
      Overload{
          [&](const IntLit& x) { out += std::to_string(x.value); },
          [&](const VarRef& x) { out += x.name; },
          [&](const ArrayLoad& x) {
            out += x.array;
            out += '[';
            print_expr_into(*x.index, 0, out);
            out += ']';
          },
          [&](const UnaryExpr& x) {
            bool paren = kUnaryPrec < parent_prec;
            if (paren) out += '(';
            out += to_symbol(x.op);
            print_expr_into(*x.operand, kUnaryPrec, out);
            if (paren) out += ')';
          },
          [&](const BinaryExpr& x) {
            int prec = prec_of(x.op);
            bool paren = prec < parent_prec;
            if (paren) out += '(';
            print_expr_into(*x.lhs, prec, out);
            out += ' ';
            out += to_symbol(x.op);
            out += ' ';
            // Left-associative: equal precedence on the right needs parens.
            print_expr_into(*x.rhs, prec + 1, out);
            if (paren) out += ')';
          },
      },
      e.node);
}

void print_block(const Block& b, int indent, std::string& out);

void print_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::visit(
      Overload{
          [&](const Assign& x) {
            out += pad + x.name + " = ";
            print_expr_into(*x.value, 0, out);
            out += ";\n";
          },
          [&](const ArrayStore& x) {
            out += pad + x.array + "[";
            print_expr_into(*x.index, 0, out);
            out += "] = ";
            print_expr_into(*x.value, 0, out);
            out += ";\n";
          },
          [&](const If& x) {
            out += pad + "if (";
            print_expr_into(*x.cond, 0, out);
            out += ") {\n";
            print_block(x.then_body, indent + 1, out);
            out += pad + "}";
            if (!x.else_body.empty()) {
              // Single-if else bodies print as an `else if` chain.
              if (x.else_body.size() == 1 &&
                  std::holds_alternative<If>(x.else_body.front()->node)) {
                out += " else ";
                std::string chain;
                print_stmt(*x.else_body.front(), indent, chain);
                // Drop the leading indentation of the chained if.
                out += chain.substr(pad.size());
                return;
              }
              out += " else {\n";
              print_block(x.else_body, indent + 1, out);
              out += pad + "}";
            }
            out += "\n";
          },
          [&](const While& x) {
            out += pad + "while (";
            print_expr_into(*x.cond, 0, out);
            out += ") {\n";
            print_block(x.body, indent + 1, out);
            out += pad + "}\n";
          },
          [&](const For& x) {
            out += pad + "for " + x.var + " in ";
            print_expr_into(*x.lo, 0, out);
            out += "..";
            print_expr_into(*x.hi, 0, out);
            out += " {\n";
            print_block(x.body, indent + 1, out);
            out += pad + "}\n";
          },
          [&](const Return& x) {
            out += pad + "return ";
            print_expr_into(*x.value, 0, out);
            out += ";\n";
          },
          [&](const CallAssign& x) {
            out += pad + x.target + " = " + x.callee + "(";
            for (std::size_t i = 0; i < x.args.size(); ++i) {
              if (i) out += ", ";
              print_expr_into(*x.args[i], 0, out);
            }
            out += ");\n";
          },
      },
      s.node);
}

void print_block(const Block& b, int indent, std::string& out) {
  for (const auto& s : b) print_stmt(*s, indent, out);
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print_expr_into(e, 0, out);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  bool first = true;
  for (const auto& f : p.functions) {
    if (!first) out += "\n";
    first = false;
    out += "fn " + f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += f.params[i].name;
      if (f.params[i].is_array()) {
        out += "[" + std::to_string(*f.params[i].array_length) + "]";
      }
    }
    out += ") {\n";
    print_block(f.body, 1, out);
    out += "}\n";
  }
  return out;
}

}  // namespace verimodel
