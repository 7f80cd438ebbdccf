//===-- test_optimizer.cpp ----------------------------------------------------===//
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
#include "verimodel/features.hpp"
#include "verimodel/optimizer.hpp"
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

// Independent node counter used as the oracle for pass-trace sizes.
std::size_t count_nodes_expr(const Expr& e) {
  std::size_t n = 1;
  std::visit(Overload{
                 [&](const ArrayLoad& x) { n += count_nodes_expr(*x.index); },
                 [&](const UnaryExpr& x) { n += count_nodes_expr(*x.operand); },
                 [&](const BinaryExpr& x) {
                   n += count_nodes_expr(*x.lhs) + count_nodes_expr(*x.rhs);
                 },
                 [](const auto&) {},
             },
             e.node);
  return n;
}

std::size_t count_nodes_block(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b) {
    n += 1;
    std::visit(Overload{
                   [&](const Assign& x) { n += count_nodes_expr(*x.value); },
                   [&](const ArrayStore& x) {
                     n += count_nodes_expr(*x.index) + count_nodes_expr(*x.value);
                   },
                   [&](const If& x) {
                     n += count_nodes_expr(*x.cond) +
                          count_nodes_block(x.then_body) +
                          count_nodes_block(x.else_body);
                   },
                   [&](const While& x) {
                     n += count_nodes_expr(*x.cond) + count_nodes_block(x.body);
                   },
                   [&](const For& x) {
                     n += count_nodes_expr(*x.lo) + count_nodes_expr(*x.hi) +
                          count_nodes_block(x.body);
                   },
                   [&](const Return& x) { n += count_nodes_expr(*x.value); },
                   [&](const CallAssign& x) {
                     for (const auto& a : x.args) n += count_nodes_expr(*a);
                   },
               },
               s->node);
  }
  return n;
}

std::size_t count_nodes(const Program& p) {
  std::size_t n = 0;
  for (const auto& f : p.functions) n += count_nodes_block(f.body);
  return n;
}

std::size_t count_calls(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b) {
    std::visit(Overload{
                   [&](const CallAssign&) { ++n; },
                   [&](const If& x) {
                     n += count_calls(x.then_body) + count_calls(x.else_body);
                   },
                   [&](const While& x) { n += count_calls(x.body); },
                   [&](const For& x) { n += count_calls(x.body); },
                   [](const auto&) {},
               },
               s->node);
  }
  return n;
}

bool has_for(const Block& b) {
  for (const auto& s : b) {
    bool found = std::visit(Overload{
                                [&](const For& x) {
                                  (void)x;
                                  return true;
                                },
                                [&](const If& x) {
                                  return has_for(x.then_body) ||
                                         has_for(x.else_body);
                                },
                                [&](const While& x) { return has_for(x.body); },
                                [](const auto&) { return false; },
                            },
                            s->node);
    if (found) return true;
  }
  return false;
}

bool same_outcome(const InterpResult& a, const InterpResult& b) {
  if (a.ok() != b.ok()) return false;
  if (a.ok()) return *a.value == *b.value;
  return a.trap->kind == b.trap->kind;
}

}  // namespace

TEST_CASE("constant folding: return 2 + 3 becomes return 5") {
  Program p = parse_program("fn f() { return 2 + 3; }");
  OptConfig cfg = OptConfig::from_names("constant-fold");
  Program q = optimize(p, cfg);
  Program expect = parse_program("fn f() { return 5; }");
  CHECK(equal(q, expect));
}

TEST_CASE("constant propagation turns x * c into x * 4") {
  Program p = parse_program(
      "fn f(x) { c = 4; if (x * c < 8) { return 1; } return 0; }");
  OptConfig cfg = OptConfig::from_names("constant-propagate");
  Program q = optimize(p, cfg);
  const auto& body = q.functions[0].body;
  // Find the if and check its condition is x * 4 < 8.
  const If* branch = nullptr;
  for (const auto& s : body) {
    if (const auto* node = std::get_if<If>(&s->node)) branch = node;
  }
  REQUIRE(branch != nullptr);
  CHECK(equal(*branch->cond,
              *parse_expr_text("x * 4 < 8")));
}

TEST_CASE("a concrete three-trip loop unrolls into three body copies") {
  Program p = parse_program(
      "fn f(a[3]) { s = 0; for i in 0..3 { s = s + a[i]; } return s; }");
  OptConfig cfg = OptConfig::from_names("unroll-concrete-loops");
  Program q = optimize(p, cfg);
  CHECK_FALSE(has_for(q.functions[0].body));
  Program expect = parse_program(
      "fn f(a[3]) { s = 0; s = s + a[0]; s = s + a[1]; s = s + a[2]; "
      "return s; }");
  CHECK(equal(q, expect));
}

TEST_CASE("pass trace: empty pipeline yields an empty trace") {
  Program p = parse_program("fn f() { return 2 + 3; }");
  OptConfig cfg;
  cfg.passes.clear();
  CHECK(pass_trace(p, cfg).empty());
}

TEST_CASE("pass trace: a single fold pass on 2+3 reports sizes 4 -> 2") {
  Program p = parse_program("fn f() { return 2 + 3; }");
  CHECK(count_nodes(p) == 4);  // independent walker
  OptConfig cfg = OptConfig::from_names("constant-fold");
  auto trace = pass_trace(p, cfg);
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].pass == "constant-fold");
  CHECK(trace[0].size_before == 4);
  CHECK(trace[0].size_after == 2);
  CHECK(count_nodes(optimize(p, cfg)) == 2);
}

TEST_CASE("dead-code elimination removes a statically false branch") {
  Program p = parse_program(
      "fn f(x) { if (0 > 1) { x = x + 100; } return x; }");
  OptConfig cfg = OptConfig::from_names("constant-fold,dead-code-eliminate");
  auto trace = pass_trace(p, cfg);
  REQUIRE(trace.size() == 2);
  CHECK(trace[1].pass == "dead-code-eliminate");
  CHECK(trace[1].size_after < trace[1].size_before);
  Program q = optimize(p, cfg);
  CHECK(equal(q, parse_program("fn f(x) { return x; }")));
}

TEST_CASE("unrolling skips loops beyond the budget and records a note") {
  Program p = parse_program(
      "fn f() { s = 0; for i in 0..100 { s = s + i; } return s; }");
  OptConfig cfg = OptConfig::from_names("unroll-concrete-loops");
  cfg.max_body_copies = 10;
  std::vector<OptNote> notes;
  Program q = optimize(p, cfg, &notes);
  CHECK(has_for(q.functions[0].body));
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].pass == "unroll-concrete-loops");
  CHECK(notes[0].message.find("budget") != std::string::npos);
}

TEST_CASE("trap preservation: division by a zero constant is never folded") {
  Program p = parse_program("fn f() { x = 1 / 0; return x; }");
  Program q = optimize(p, OptConfig{});
  auto r = interpret(q, {});
  REQUIRE_FALSE(r.ok());
  CHECK(r.trap->kind == Trap::Kind::DivideByZero);
}

TEST_CASE("trap preservation: x*0 only folds when x cannot trap") {
  Program p = parse_program("fn f(y) { return (1 / y) * 0; }");
  Program q = optimize(p, OptConfig{});
  ConcreteInput zero;
  zero.scalars["y"] = 0;
  auto r = interpret(q, zero);
  REQUIRE_FALSE(r.ok());
  CHECK(r.trap->kind == Trap::Kind::DivideByZero);

  // With a trap-free operand the identity applies.
  Program p2 = parse_program("fn f(y) { return (y + 1) * 0; }");
  Program q2 = optimize(p2, OptConfig{});
  CHECK(equal(q2, parse_program("fn f(y) { return 0; }")));
}

TEST_CASE("inlining flattens the three-function corpus program") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("minmax3.mc")));
  Program q = optimize(p, OptConfig{});
  REQUIRE(validate(q).empty());
  // All calls expanded, unreachable helpers pruned.
  CHECK(q.functions.size() == 1);
  CHECK(count_calls(q.functions[0].body) == 0);
}

TEST_CASE("optimized programs remain valid on the whole corpus") {
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    Program q = optimize(p, OptConfig{});
    auto diags = validate(q);
    CAPTURE(format_diagnostics(diags));
    CHECK(diags.empty());
  }
}

TEST_CASE("differential semantics: 200 random inputs per corpus program") {
  std::mt19937_64 rng(7);
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    Program q = optimize(p, OptConfig{});
    for (int i = 0; i < 200; ++i) {
      ConcreteInput in = verimodel::testing::random_input(p, rng);
      InterpResult a = interpret(p, in);
      InterpResult b = interpret(q, in);
      CAPTURE(i);
      CHECK(same_outcome(a, b));
    }
  }
}

TEST_CASE("idempotence: optimizing twice equals optimizing once") {
  OptConfig cfg;
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    Program once = optimize(p, cfg);
    Program twice = optimize(once, cfg);
    CHECK(equal(once, twice));
  }
}

TEST_CASE("dead-code elimination never increases cyclomatic complexity") {
  OptConfig dce = OptConfig::from_names("dead-code-eliminate");
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    Program q = optimize(p, dce);
    for (const auto& f : q.functions) {
      const Function* orig = p.find_function(f.name);
      REQUIRE(orig != nullptr);
      CHECK(cyclomatic_complexity(f) <= cyclomatic_complexity(*orig));
    }
  }
}

TEST_CASE("fully unrolling a branch-free concrete loop drops cc by exactly 1") {
  Program p = parse_program(
      "fn f(a[4]) { s = 0; for i in 0..4 { s = s + a[i]; } return s; }");
  std::size_t before = cyclomatic_complexity(p.functions[0]);
  Program q = optimize(p, OptConfig::from_names("unroll-concrete-loops"));
  std::size_t after = cyclomatic_complexity(q.functions[0]);
  CHECK(before - after == 1);
}

TEST_CASE("unreachable statements after return are removed") {
  Program p = parse_program("fn f(x) { return x; x = 1; return 0; }");
  Program q = optimize(p, OptConfig::from_names("dead-code-eliminate"));
  CHECK(equal(q, parse_program("fn f(x) { return x; }")));
}

TEST_CASE("dead stores with trap-free right-hand sides are removed") {
  Program p = parse_program("fn f(x) { y = x + 1; return x; }");
  Program q = optimize(p, OptConfig::from_names("dead-code-eliminate"));
  CHECK(equal(q, parse_program("fn f(x) { return x; }")));

  // A potentially trapping right-hand side must stay.
  Program p2 = parse_program("fn f(x) { y = 1 / x; return x; }");
  Program q2 = optimize(p2, OptConfig::from_names("dead-code-eliminate"));
  CHECK(equal(q2, p2));
}
