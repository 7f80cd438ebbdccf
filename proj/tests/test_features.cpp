//===-- test_features.cpp ----------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support/oracle.hpp"
#include "verimodel/features.hpp"
#include "verimodel/optimizer.hpp"
#include "verimodel/parser.hpp"
#include "verimodel/symexec.hpp"

using namespace verimodel;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SymbolSpec sym_scalar_spec(const Function& f, std::int64_t lo, std::int64_t hi) {
  SymbolSpec spec;
  spec.function = f.name;
  for (const auto& p : f.params) {
    if (p.is_array()) {
      spec.arrays[p.name] = {true, {}, lo, hi};
    } else {
      spec.scalars[p.name] = {true, 0, lo, hi};
    }
  }
  return spec;
}

}  // namespace

TEST_CASE("cyclomatic complexity counts decision points") {
  CHECK(cyclomatic_complexity(
            parse_program("fn f(x) { y = x + 1; return y; }").functions[0]) == 1);
  CHECK(cyclomatic_complexity(
            parse_program("fn f(x) { if (x < 0) { return 0; } return x; }")
                .functions[0]) == 2);
  // if + while with an `a && b` condition: 1 + 1 + 1 + 1 = 4, counted by an
  // independent walk over the decision points.
  Program p = parse_program(
      "fn f(a, b) {"
      "  s = 0;"
      "  if (a < b) { s = 1; }"
      "  while (a > 0 && b > 0) { a = a - 1; }"
      "  return s;"
      "}");
  CHECK(cyclomatic_complexity(p.functions[0]) == 4);
}

TEST_CASE("branch linearity classification") {
  Program p = parse_program(
      "fn f(x, y, c) {"
      "  if (x + 2 * y < 7) { return 1; }"
      "  if (x * y < 7) { return 2; }"
      "  if (x * c < 8) { return 3; }"
      "  return 0;"
      "}");
  const Function& f = p.functions[0];
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {true, 0, -10, 10};
  spec.scalars["y"] = {true, 0, -10, 10};
  spec.scalars["c"] = {false, 4, 0, 0};

  auto cond = [&](std::size_t i) -> const Expr& {
    return *std::get<If>(f.body[i]->node).cond;
  };

  BranchInfo a = classify_branch(cond(0), spec, f);
  CHECK(a.is_symbolic);
  CHECK(a.is_linear == true);

  BranchInfo b = classify_branch(cond(1), spec, f);
  CHECK(b.is_symbolic);
  CHECK(b.is_linear == false);

  BranchInfo c = classify_branch(cond(2), spec, f);
  CHECK(c.is_symbolic);
  CHECK(c.is_linear == true);
}

TEST_CASE("a branch reading no symbolic state is not symbolic") {
  Program p = parse_program("fn f(x, k) { if (k < 3) { return 1; } return x; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {true, 0, 0, 5};
  spec.scalars["k"] = {false, 1, 0, 0};
  const Expr& cond = *std::get<If>(p.functions[0].body[0]->node).cond;
  BranchInfo info = classify_branch(cond, spec, p.functions[0]);
  CHECK_FALSE(info.is_symbolic);
  CHECK_FALSE(info.is_linear.has_value());
}

TEST_CASE("division by a symbolic divisor is nonlinear") {
  Program p = parse_program("fn f(x, y) { if (x / y < 2) { return 1; } return 0; }");
  SymbolSpec spec = sym_scalar_spec(p.functions[0], 1, 9);
  const Expr& cond = *std::get<If>(p.functions[0].body[0]->node).cond;
  BranchInfo info = classify_branch(cond, spec, p.functions[0]);
  CHECK(info.is_symbolic);
  CHECK(info.is_linear == false);
}

TEST_CASE("loop analysis distinguishes concrete and symbolic trip counts") {
  Program p = parse_program(
      "fn f(n, a[4]) {"
      "  s = 0;"
      "  for i in 0..10 { s = s + 1; }"
      "  i = 0;"
      "  while (i < n) { i = i + 1; }"
      "  return s;"
      "}");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["n"] = {true, 0, 0, 7};
  spec.arrays["a"] = {false, {1, 2, 3, 4}, 0, 0};
  auto loops = analyze_loops(p.functions[0], spec);
  REQUIRE(loops.size() == 2);
  CHECK_FALSE(loops[0].is_symbolic);
  CHECK(loops[1].is_symbolic);
  CHECK(loops[1].body_instruction_count == 4);  // i = i + 1
}

TEST_CASE("taint propagates through derived loop bounds") {
  Program p = parse_program(
      "fn f(n) {"
      "  m = n + 1;"
      "  i = 0;"
      "  while (i < m) { i = i + 1; }"
      "  return i;"
      "}");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["n"] = {true, 0, 0, 3};
  auto loops = analyze_loops(p.functions[0], spec);
  REQUIRE(loops.size() == 1);
  // Manual dependence trace: m reads n (symbolic), the loop reads m.
  CHECK(loops[0].is_symbolic);
}

TEST_CASE("feature extraction on a branch-free all-concrete function") {
  Program p = parse_program("fn f(x) { y = x * 2; return y; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {false, 3, 0, 0};
  FeatureVector fv = extract_features(p.functions[0], spec);
  CHECK(fv.cc == 1);
  CHECK(fv.n_sym_loops == 0);
  CHECK(fv.sym_loop_body_total == 0);
  CHECK(fv.n_sym_branches_linear == 0);
  CHECK(fv.n_sym_branches_nonlinear == 0);
  CHECK(fv.n_sym_params == 0);
  CHECK(fv.array_size_total == 0);
  CHECK(fv.scalar_values.at("x") == 3);
  CHECK(fv.domain_widths.empty());
}

TEST_CASE("feature extraction aggregates loop and branch statistics") {
  Program p = parse_program(
      "fn f(x, n) {"
      "  if (x < 3) { x = x + 1; }"
      "  i = 0;"
      "  while (i < n) { i = i + 1; t = i * 2; s = t; }"
      "  return x;"
      "}");
  SymbolSpec spec = sym_scalar_spec(p.functions[0], 0, 7);
  FeatureVector fv = extract_features(p.functions[0], spec);
  CHECK(fv.n_sym_branches_linear == 1);
  CHECK(fv.n_sym_branches_nonlinear == 0);
  CHECK(fv.n_sym_loops == 1);
  CHECK(fv.sym_loop_body_total == 10);
  CHECK(fv.sym_loop_body_max == 10);
  CHECK(fv.n_sym_params == 2);
  CHECK(fv.domain_widths.at("x") == 8);
  CHECK(fv.domain_widths.at("n") == 8);
}

TEST_CASE("array sizes aggregate to total and max") {
  Program p = parse_program("fn f(a[8], b[3]) { return a[0] + b[0]; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.arrays["a"] = {true, {}, 0, 1};
  spec.arrays["b"] = {true, {}, 0, 1};
  FeatureVector fv = extract_features(p.functions[0], spec);
  CHECK(fv.array_size_total == 11);
  CHECK(fv.array_size_max == 8);
  CHECK(fv.n_sym_params == 2);
}

TEST_CASE("extraction is deterministic") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("gcd_step.mc")));
  SymbolSpec spec = load_spec(verimodel::testing::corpus_path("gcd_step.spec.json"));
  FeatureVector a = extract_features(p.functions[0], spec);
  FeatureVector b = extract_features(p.functions[0], spec);
  CHECK(feature_columns(a) == feature_columns(b));
}

TEST_CASE("feature column order is fixed with named columns sorted") {
  Program p = parse_program("fn f(x, n) { return x + n; }");
  SymbolSpec spec;
  spec.function = "f";
  spec.scalars["x"] = {false, 5, 0, 0};
  spec.scalars["n"] = {true, 0, 0, 3};
  auto cols = feature_columns(extract_features(p.functions[0], spec));
  REQUIRE(cols.size() == 11);
  CHECK(cols[0].first == "cc");
  CHECK(cols[8].first == "array_size_max");
  CHECK(cols[9].first == "scalar.x");
  CHECK(cols[10].first == "width.n");
}

TEST_CASE("constant propagation never turns a linear branch nonlinear") {
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    Program p = parse_program(slurp(path));
    std::string base = path.substr(0, path.size() - 3);
    SymbolSpec spec = load_spec(base + ".spec.json");
    const Function& before = p.entry_function();

    Program q = optimize(p, OptConfig::from_names("constant-propagate"));
    const Function& after = q.entry_function();

    // Collect branch classifications per source location.
    auto classify_all = [&spec](const Function& f) {
      std::map<std::pair<int, int>, bool> linear;
      std::function<void(const Block&)> walk = [&](const Block& b) {
        for (const auto& s : b) {
          std::visit(Overload{
                         [&](const If& x) {
                           BranchInfo info = classify_branch(*x.cond, spec, f);
                           if (info.is_symbolic) {
                             linear[{s->loc.line, s->loc.col}] = *info.is_linear;
                           }
                           walk(x.then_body);
                           walk(x.else_body);
                         },
                         [&](const While& x) { walk(x.body); },
                         [&](const For& x) { walk(x.body); },
                         [](const auto&) {},
                     },
                     s->node);
        }
      };
      walk(f.body);
      return linear;
    };

    auto lin_before = classify_all(before);
    auto lin_after = classify_all(after);
    for (const auto& [loc, was_linear] : lin_before) {
      if (!was_linear) continue;
      auto it = lin_after.find(loc);
      if (it != lin_after.end()) {
        CHECK(it->second);  // still linear (or no longer symbolic at all)
      }
    }
  }
}

TEST_CASE("taint soundness: loops the executor queries were flagged symbolic") {
  for (const auto& path : verimodel::testing::corpus_programs()) {
    CAPTURE(path);
    // Features are taken over optimized code, where inlining has pulled
    // callee loops into the function under analysis.
    Program p = optimize(parse_program(slurp(path)), OptConfig{});
    std::string base = path.substr(0, path.size() - 3);
    SymbolSpec spec = load_spec(base + ".spec.json");

    auto loops = analyze_loops(p.entry_function(), spec);
    std::set<std::pair<int, int>> static_symbolic;
    for (const auto& l : loops) {
      if (l.is_symbolic) static_symbolic.insert({l.location.line, l.location.col});
    }

    Limits limits;
    limits.max_paths = 20'000;
    CostReport report = execute(p, spec, limits);
    for (const auto& loc : report.symbolic_loop_sites) {
      CAPTURE(loc.line);
      CHECK(static_symbolic.count({loc.line, loc.col}) == 1);
    }
  }
}
