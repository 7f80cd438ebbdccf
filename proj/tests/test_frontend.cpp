//===-- test_frontend.cpp - Parser, printer, validator tests ----------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support/oracle.hpp"
#include "verimodel/parser.hpp"
#include "verimodel/validate.hpp"

using namespace verimodel;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal function parses to one function with one statement") {
  Program p = parse_program("fn f(x) { return x; }");
  REQUIRE(p.functions.size() == 1);
  CHECK(p.entry == "f");
  const Function& f = p.functions[0];
  CHECK(f.params.size() == 1);
  CHECK_FALSE(f.params[0].is_array());
  REQUIRE(f.body.size() == 1);
  CHECK(std::holds_alternative<Return>(f.body[0]->node));
}

TEST_CASE("if/else parses to a single if node with a comparison condition") {
  Program p = parse_program(
      "fn f(x) { if (x > 0) { return 1; } else { return 0; } }");
  const Function& f = p.functions[0];
  REQUIRE(f.body.size() == 1);
  const auto* node = std::get_if<If>(&f.body[0]->node);
  REQUIRE(node != nullptr);
  const auto* cmp = std::get_if<BinaryExpr>(&node->cond->node);
  REQUIRE(cmp != nullptr);
  // x > 0 is normalized to 0 < x.
  CHECK(cmp->op == BinaryOp::Lt);
  CHECK(std::holds_alternative<IntLit>(cmp->lhs->node));
  CHECK(std::holds_alternative<VarRef>(cmp->rhs->node));
  CHECK(node->then_body.size() == 1);
  CHECK(node->else_body.size() == 1);
}

TEST_CASE("missing return expression is a parse error at the semicolon") {
  try {
    parse_program("fn f(x) { return ; }");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.loc.line == 1);
    CHECK(e.loc.col == 18);
    CHECK(std::string(e.what()).find("expected expression") != std::string::npos);
  }
}

TEST_CASE("parse errors carry expected-token messages") {
  try {
    parse_program("fn f(x) { y = 1 }");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("expected ';'") != std::string::npos);
  }
}

TEST_CASE("array parameters carry their declared length") {
  Program p = parse_program("fn f(a[8], n) { return a[n]; }");
  const Function& f = p.functions[0];
  REQUIRE(f.params.size() == 2);
  CHECK(f.params[0].is_array());
  CHECK(*f.params[0].array_length == 8);
  CHECK_FALSE(f.params[1].is_array());
}

TEST_CASE("calls only parse as assignment right-hand sides") {
  Program ok = parse_program(
      "fn g(x) { return x; }\n"
      "fn f(x) { y = g(x); return y; }");
  CHECK(ok.functions.size() == 2);
  CHECK_THROWS_AS(parse_program("fn f(x) { return g(x); }"), ParseError);
}

TEST_CASE("validate accepts a well-formed two-function program") {
  Program p = parse_program(
      "fn main(x) { y = helper(x); return y; }\n"
      "fn helper(v) { return v + 1; }");
  CHECK(validate(p).empty());
}

TEST_CASE("use of an undeclared variable is one undefined-variable diagnostic") {
  Program p = parse_program("fn f(x) { return y; }");
  auto diags = validate(p);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].category == DiagCategory::UndefinedVariable);
  CHECK(diags[0].message.find("'y'") != std::string::npos);
}

TEST_CASE("an if branch without return is a missing-return diagnostic") {
  Program p = parse_program(
      "fn f(x) { if (x > 0) { return 1; } else { x = 2; } }");
  auto diags = validate(p);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].category == DiagCategory::MissingReturn);
}

TEST_CASE("validator catches duplicate names, unknown callees and recursion") {
  auto cats = [](const Program& p) {
    std::vector<DiagCategory> out;
    for (const auto& d : validate(p)) out.push_back(d.category);
    return out;
  };

  Program dup = parse_program("fn f(x) { return x; }\nfn f(y) { return y; }");
  auto c1 = cats(dup);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0] == DiagCategory::DuplicateName);

  Program dup_param = parse_program("fn f(x, x) { return x; }");
  auto c2 = cats(dup_param);
  REQUIRE(c2.size() == 1);
  CHECK(c2[0] == DiagCategory::DuplicateName);

  Program unk = parse_program("fn f(x) { y = g(x); return y; }");
  auto c3 = cats(unk);
  REQUIRE(c3.size() == 1);
  CHECK(c3[0] == DiagCategory::UnknownCallee);

  Program rec = parse_program("fn f(x) { y = f(x); return y; }");
  auto c4 = cats(rec);
  REQUIRE_FALSE(c4.empty());
  CHECK(std::count(c4.begin(), c4.end(), DiagCategory::RecursiveCall) == 1);

  Program mutual = parse_program(
      "fn a(x) { y = b(x); return y; }\n"
      "fn b(x) { y = a(x); return y; }");
  auto c5 = cats(mutual);
  CHECK(std::count(c5.begin(), c5.end(), DiagCategory::RecursiveCall) >= 1);
}

TEST_CASE("type mismatches: arrays as scalars and assignment to arrays") {
  Program p1 = parse_program("fn f(a[3]) { return a; }");
  auto d1 = validate(p1);
  REQUIRE(d1.size() == 1);
  CHECK(d1[0].category == DiagCategory::TypeMismatch);

  Program p2 = parse_program("fn f(a[3]) { a = 1; return 0; }");
  auto d2 = validate(p2);
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].category == DiagCategory::TypeMismatch);

  Program p3 = parse_program(
      "fn g(b[4]) { return b[0]; }\n"
      "fn f(a[3]) { y = g(a); return y; }");
  auto d3 = validate(p3);
  REQUIRE(d3.size() == 1);
  CHECK(d3[0].category == DiagCategory::TypeMismatch);
  CHECK(d3[0].message.find("length") != std::string::npos);
}

TEST_CASE("loop variables are read-only and must not shadow") {
  Program p1 = parse_program("fn f(n) { for i in 0..n { i = 3; } return 0; }");
  auto d1 = validate(p1);
  REQUIRE(d1.size() == 1);
  CHECK(d1[0].category == DiagCategory::TypeMismatch);

  Program p2 = parse_program(
      "fn f(n) { i = 1; for i in 0..n { x = i; } return 0; }");
  auto d2 = validate(p2);
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].category == DiagCategory::DuplicateName);
}

TEST_CASE("variables assigned on only one branch stay undefined after a join") {
  Program p = parse_program(
      "fn f(x) { if (x > 0) { y = 1; } else { z = 1; } return y; }");
  auto diags = validate(p);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].category == DiagCategory::UndefinedVariable);
}

TEST_CASE("round trip: print(parse(s)) is structurally stable on the corpus") {
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p1 = parse_program(slurp(path));
    std::string printed = print_program(p1);
    Program p2 = parse_program(printed);
    CHECK(equal(p1, p2));
    // Printing is canonical: a second round trip is byte-identical.
    CHECK(print_program(p2) == printed);
  }
}

TEST_CASE("round trip holds for randomly generated expressions") {
  std::mt19937_64 rng(20240817);
  std::function<ExprRef(int)> gen = [&](int depth) -> ExprRef {
    if (depth == 0 || rng() % 4 == 0) {
      switch (rng() % 3) {
        case 0: return make_int(static_cast<std::int64_t>(rng() % 100));
        case 1: return make_var("x");
        default: return make_load("a", make_int(static_cast<std::int64_t>(rng() % 4)));
      }
    }
    switch (rng() % 13) {
      case 0: return make_unary(UnaryOp::Neg, gen(depth - 1));
      case 1: return make_unary(UnaryOp::Not, gen(depth - 1));
      default: {
        auto op = static_cast<BinaryOp>(rng() % 11);
        return make_binary(op, gen(depth - 1), gen(depth - 1));
      }
    }
  };
  for (int i = 0; i < 300; ++i) {
    ExprRef e = gen(4);
    std::string printed = print_expr(*e);
    CAPTURE(printed);
    ExprRef back = parse_expr_text(printed);
    CHECK(equal(*e, *back));
  }
}

TEST_CASE("the corpus parses and validates cleanly") {
  auto programs = verimodel::testing::corpus_programs();
  CHECK(programs.size() >= 10);
  for (const auto& path : programs) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    auto diags = validate(p);
    CAPTURE(format_diagnostics(diags));
    CHECK(diags.empty());
  }
}

TEST_CASE("ir_size counts statement and expression nodes") {
  Program p = parse_program("fn f() { return 2 + 3; }");
  // return + binary + two literals.
  CHECK(ir_size(p) == 4);
}
