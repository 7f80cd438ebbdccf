//===-- test_symexec.cpp ----------------------------------------------------===//
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
#include "verimodel/optimizer.hpp"
#include "verimodel/parser.hpp"
#include "verimodel/symexec.hpp"

using namespace verimodel;
using verimodel::testing::count_distinct_paths;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool accounting_identity(const PathStats& s) {
  return s.paths_completed + s.paths_infeasible + s.paths_truncated ==
         s.forks + 1;
}

}  // namespace

TEST_CASE("a single symbolic branch explores two paths with one fork") {
  Program p = parse_program(
      "fn f(x) { if (x > 0) { return 1; } else { return 0; } }");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {true, 0, -5, 5};
  CostReport r = execute(p, spec);
  CHECK(r.stats.paths_completed == 2);
  CHECK(r.stats.forks == 1);
  CHECK(r.stats.paths_infeasible == 0);
  CHECK(r.stats.queries >= r.stats.forks);
  CHECK(accounting_identity(r.stats));
}

TEST_CASE("while (i < n) with n in [0,3] completes four paths") {
  Program p = parse_program(
      "fn f(n) { i = 0; while (i < n) { i = i + 1; } return i; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["n"] = {true, 0, 0, 3};
  CostReport r = execute(p, spec);
  // Brute force: one terminating path per n in {0,1,2,3}.
  CHECK(count_distinct_paths(p, spec) == 4);
  CHECK(r.stats.paths_completed == 4);
  CHECK(accounting_identity(r.stats));
}

TEST_CASE("contradictory nested conditions prune one infeasible path") {
  Program p = parse_program(
      "fn f(x) {"
      "  if (x > 0) {"
      "    if (x < 0) { return 9; } else { return 1; }"
      "  } else {"
      "    return 0;"
      "  }"
      "}");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {true, 0, -5, 5};
  // The three syntactic paths collapse to two feasible ones.
  CHECK(count_distinct_paths(p, spec) == 2);
  CostReport r = execute(p, spec);
  CHECK(r.stats.paths_completed == 2);
  CHECK(r.stats.paths_infeasible == 1);
  CHECK(accounting_identity(r.stats));
}

TEST_CASE("interpret: identity, divide-by-zero trap, out-of-bounds trap") {
  Program id = parse_program("fn f(x) { return x; }");
  ConcreteInput in;
  in.scalars["x"] = 7;
  auto r = interpret(id, in);
  REQUIRE(r.ok());
  CHECK(*r.value == 7);

  Program div = parse_program("fn f(x) { return 1 / x; }");
  ConcreteInput zero;
  zero.scalars["x"] = 0;
  auto rz = interpret(div, zero);
  REQUIRE_FALSE(rz.ok());
  CHECK(rz.trap->kind == Trap::Kind::DivideByZero);

  Program oob = parse_program("fn f(a[3]) { return a[3]; }");
  ConcreteInput arr;
  arr.arrays["a"] = {1, 2, 3};
  auto ro = interpret(oob, arr);
  REQUIRE_FALSE(ro.ok());
  CHECK(ro.trap->kind == Trap::Kind::OutOfBounds);
}

TEST_CASE("concrete-spec degeneracy: one path, no forks, no queries") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("gcd_step.mc")));
  SymbolSpec spec;
  spec.function = "gcd_step";
  spec.scalars["a"] = {false, 12, 0, 0};
  spec.scalars["b"] = {false, 9, 0, 0};
  CostReport r = execute(p, spec);
  CHECK(r.stats.paths_completed == 1);
  CHECK(r.stats.forks == 0);
  CHECK(r.stats.queries == 0);
  REQUIRE(r.single_concrete_return.has_value());
  ConcreteInput in;
  in.scalars["a"] = 12;
  in.scalars["b"] = 9;
  CHECK(*r.single_concrete_return == *interpret(p, in).value);
}

TEST_CASE("loop family: paths_completed = k+1 for k in 0..20") {
  Program p = parse_program(
      "fn f(n) { i = 0; while (i < n) { i = i + 1; } return i; }");
  for (std::int64_t k = 0; k <= 20; ++k) {
    SymbolSpec spec;
    spec.function = "f";
    spec.scalars["n"] = {true, 0, 0, k};
    CostReport r = execute(p, spec);
    CAPTURE(k);
    CHECK(r.stats.paths_completed == static_cast<std::uint64_t>(k) + 1);
    CHECK(accounting_identity(r.stats));
  }
}

TEST_CASE("determinism: identical runs produce identical stats and cost") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("table_lookup.mc")));
  SymbolSpec spec =
      load_spec(verimodel::testing::corpus_path("table_lookup.spec.json"));
  CostReport a = execute(p, spec);
  CostReport b = execute(p, spec);
  CHECK(a.deterministic_cost == b.deterministic_cost);
  CHECK(a.stats.paths_completed == b.stats.paths_completed);
  CHECK(a.stats.queries == b.stats.queries);
  CHECK(a.stats.propagation_steps_total == b.stats.propagation_steps_total);
  CHECK(a.stats.instructions_executed == b.stats.instructions_executed);
  CHECK(a.stats.memory_accesses == b.stats.memory_accesses);
  CHECK(a.stats.arithmetic_ops == b.stats.arithmetic_ops);
}

TEST_CASE("symbolic division forks a divide-by-zero error path") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("rawdiv.mc")));
  SymbolSpec spec = load_spec(verimodel::testing::corpus_path("rawdiv.spec.json"));
  CostReport r = execute(p, spec);
  REQUIRE_FALSE(r.error_paths.empty());
  CHECK(r.error_paths[0].kind == Trap::Kind::DivideByZero);
  CHECK(accounting_identity(r.stats));
  // The guarded variant has no feasible error path.
  Program safe = parse_program(slurp(verimodel::testing::corpus_path("safe_div.mc")));
  SymbolSpec safe_spec =
      load_spec(verimodel::testing::corpus_path("safe_div.spec.json"));
  CostReport rs = execute(safe, safe_spec);
  CHECK(rs.error_paths.empty());
}

TEST_CASE("symbolic array index expands by case split over the domain") {
  Program p = parse_program("fn f(a[3], i) { return a[i]; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.arrays["a"] = {true, {}, -5, 5};
  spec.scalars["i"] = {true, 0, 0, 2};
  CostReport r = execute(p, spec);
  // One completed path per feasible index; out-of-bounds sides infeasible.
  CHECK(r.stats.paths_completed == 3);
  CHECK(r.stats.paths_infeasible == 2);
  CHECK(r.stats.forks == 4);
  CHECK(accounting_identity(r.stats));

  // Allowing out-of-bounds indices adds error paths.
  spec.scalars["i"] = {true, 0, -1, 3};
  CostReport r2 = execute(p, spec);
  CHECK(r2.stats.paths_completed == 5);
  CHECK(r2.error_paths.size() == 2);
  CHECK(accounting_identity(r2.stats));
}

TEST_CASE("loop iteration cap truncates instead of diverging") {
  Program p = parse_program(
      "fn f(x) { i = 0; while (0 < 1) { i = i + x; } return i; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {true, 0, 0, 1};
  Limits limits;
  limits.max_loop_iterations = 16;
  CostReport r = execute(p, spec, limits);
  CHECK(r.stats.paths_truncated == 1);
  CHECK(r.stats.paths_completed == 0);
  CHECK(accounting_identity(r.stats));
}

TEST_CASE("path budget flushes in-flight paths as truncated") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("branch_tree.mc")));
  SymbolSpec spec =
      load_spec(verimodel::testing::corpus_path("branch_tree.spec.json"));
  Limits limits;
  limits.max_paths = 3;
  CostReport r = execute(p, spec, limits);
  CHECK(r.stats.paths_truncated > 0);
  CHECK(accounting_identity(r.stats));
  CHECK(r.stats.paths_completed + r.stats.paths_infeasible +
            r.stats.paths_truncated >= 3);
}

TEST_CASE("path-count oracle: executor matches exhaustive enumeration") {
  // Programs with at most two symbolic scalars of width <= 10 (plus small
  // symbolic arrays), loop caps not hit.
  const char* names[] = {"loopsum",    "absdiff",  "clamp",     "safe_div",
                         "rawdiv",     "gcd_step", "poly3",     "table_lookup",
                         "nested_loops", "unroll_mix", "branch_tree",
                         "count_even", "dot",      "store_reverse", "sat_add",
                         "find_first_neg"};
  for (const char* name : names) {
    CAPTURE(name);
    Program p = parse_program(
        slurp(verimodel::testing::corpus_path(std::string(name) + ".mc")));
    SymbolSpec spec = load_spec(
        verimodel::testing::corpus_path(std::string(name) + ".spec.json"));
    std::size_t expected = count_distinct_paths(p, spec);
    CostReport r = execute(p, spec);
    CHECK(r.stats.paths_truncated == 0);
    CHECK(r.stats.paths_completed == expected);
    CHECK(accounting_identity(r.stats));
  }
}

TEST_CASE("path accounting identity holds across the whole corpus") {
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    std::string base = path.substr(0, path.size() - 3);
    SymbolSpec spec = load_spec(base + ".spec.json");
    CostReport r = execute(p, spec);
    CHECK(accounting_identity(r.stats));

    // The identity also holds for optimized programs.
    Program q = optimize(p, OptConfig{});
    CostReport ro = execute(q, spec);
    CHECK(accounting_identity(ro.stats));
    // Optimization must not change the set of feasible behaviours.
    CHECK(ro.stats.paths_completed <= r.stats.paths_completed);
  }
}

TEST_CASE("deterministic cost honours configured weights") {
  PathStats s;
  s.instructions_executed = 7;
  s.memory_accesses = 2;
  s.forks = 3;
  s.propagation_steps_total = 11;
  CHECK(deterministic_cost(s, CostWeights{}) == 7 + 20 + 150 + 11);
  CostWeights only_forks{0, 0, 50, 0};
  CHECK(deterministic_cost(s, only_forks) == 150);
}

TEST_CASE("monotonicity: growing domains never shrink the path count") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("loopsum.mc")));
  std::uint64_t prev = 0;
  for (std::int64_t hi = 0; hi <= 10; ++hi) {
    SymbolSpec spec;
    spec.function = "loopsum";
    spec.scalars["n"] = {true, 0, 0, hi};
    spec.scalars["c"] = {false, 3, 0, 0};
    CostReport r = execute(p, spec);
    CHECK(r.stats.paths_completed >= prev);
    prev = r.stats.paths_completed;
  }
}
