//===-- acceptance.cpp - End-to-end acceptance criteria -----------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// One test case per acceptance criterion; each prints a single PASS/FAIL
// line with its runtime. Tolerances and budgets are pinned here, in code.
//
//===----------------------------------------------------------------------===//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "support/oracle.hpp"
#include "verimodel/doe.hpp"
#include "verimodel/optimizer.hpp"
#include "verimodel/parser.hpp"
#include "verimodel/pipeline.hpp"
#include "verimodel/rng.hpp"

using namespace verimodel;
namespace fs = std::filesystem;

namespace {

class Criterion {
 public:
  Criterion(int number, const char* name, double budget_seconds)
      : number_(number),
        name_(name),
        budget_(budget_seconds),
        start_(std::chrono::steady_clock::now()) {}

  void expect(bool condition) { ok_ = ok_ && condition; }

  ~Criterion() {
    auto end = std::chrono::steady_clock::now();
    double elapsed =
        std::chrono::duration_cast<std::chrono::duration<double>>(end - start_)
            .count();
    bool in_budget = elapsed < budget_;
    std::printf("[criterion %2d] %-58s %s (%.2f s, budget %.0f s)\n", number_,
                name_, ok_ && in_budget ? "PASS" : "FAIL", elapsed, budget_);
    std::fflush(stdout);
    CHECK(in_budget);
  }

 private:
  int number_;
  const char* name_;
  double budget_;
  bool ok_ = true;
  std::chrono::steady_clock::time_point start_;
};

#define EXPECT(crit, cond)          \
  do {                              \
    bool checked__ = !!(cond);      \
    CHECK(checked__);               \
    (crit).expect(checked__);       \
  } while (0)

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("verimodel-accept-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("criterion 1: path-count oracle on the symbolic loop family") {
  Criterion crit(1, "paths_completed = k+1 for while(i<n), k in 0..20", 5.0);
  Program p = parse_program(
      "fn f(n) { i = 0; while (i < n) { i = i + 1; } return i; }");
  for (std::int64_t k = 0; k <= 20; ++k) {
    SymbolSpec spec;
    spec.function = "f";
    spec.scalars["n"] = {true, 0, 0, k};
    CostReport r = execute(p, spec);
    EXPECT(crit, r.stats.paths_completed == static_cast<std::uint64_t>(k) + 1);
    EXPECT(crit, r.stats.paths_truncated == 0);
  }
}

TEST_CASE("criterion 2: solver agrees with exhaustive enumeration") {
  Criterion crit(2, "decide() vs brute force on 200 random constraints", 10.0);
  std::mt19937_64 rng(919);
  const char* names[3] = {"x", "y", "z"};

  std::function<ExprRef(int, int)> random_expr = [&](int n_vars,
                                                     int depth) -> ExprRef {
    if (depth == 0 || rng() % 3 == 0) {
      if (rng() % 2 == 0) {
        return make_int(static_cast<std::int64_t>(rng() % 21) - 10);
      }
      return make_var(names[rng() % n_vars]);
    }
    BinaryOp ops[5] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul,
                       BinaryOp::Div, BinaryOp::Mod};
    return make_binary(ops[rng() % 5], random_expr(n_vars, depth - 1),
                       random_expr(n_vars, depth - 1));
  };

  int agreements = 0;
  for (int round = 0; round < 200; ++round) {
    int n_vars = 1 + static_cast<int>(rng() % 3);
    DomainMap d;
    for (int v = 0; v < n_vars; ++v) {
      auto width = static_cast<std::int64_t>(rng() % 20);
      auto lo = static_cast<std::int64_t>(rng() % 21) - 10;
      d.declare(names[v], lo, lo + width);
    }
    Constraint c;
    RelOp rels[4] = {RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ne};
    int n_atoms = 1 + static_cast<int>(rng() % 3);
    for (int a = 0; a < n_atoms; ++a) {
      c.atoms.push_back(
          Atom{random_expr(n_vars, 2), rels[rng() % 4], random_expr(n_vars, 2)});
    }

    SolverResult r = decide(c, d);
    // Brute force over the full grid.
    bool brute_sat = false;
    std::map<std::string, std::int64_t> point;
    std::function<void(std::size_t)> sweep = [&](std::size_t k) {
      if (brute_sat) return;
      if (k == d.vars.size()) {
        brute_sat = check_witness(c, point);
        return;
      }
      for (std::int64_t v = d.vars[k].second.lo; v <= d.vars[k].second.hi; ++v) {
        point[d.vars[k].first] = v;
        sweep(k + 1);
        if (brute_sat) return;
      }
    };
    sweep(0);

    bool agrees = r.status != SolveStatus::BudgetExceeded &&
                  (r.status == SolveStatus::Sat) == brute_sat &&
                  (r.status != SolveStatus::Sat || check_witness(c, r.witness));
    if (agrees) ++agreements;
    EXPECT(crit, agrees);
  }
  EXPECT(crit, agreements == 200);  // 100% agreement
}

TEST_CASE("criterion 3: optimizer preserves semantics incl. traps") {
  Criterion crit(3, "interpret(original)=interpret(optimized), 1000 inputs", 30.0);
  auto programs = verimodel::testing::corpus_programs();
  EXPECT(crit, programs.size() >= 10);
  std::mt19937_64 rng(20240808);
  for (const auto& path : programs) {
    Program original = parse_program(slurp(path));
    Program optimized = optimize(original, OptConfig{});
    bool all_match = true;
    for (int i = 0; i < 1000; ++i) {
      ConcreteInput in = verimodel::testing::random_input(original, rng);
      InterpResult a = interpret(original, in);
      InterpResult b = interpret(optimized, in);
      bool match = a.ok() == b.ok() &&
                   (a.ok() ? *a.value == *b.value
                           : a.trap->kind == b.trap->kind);
      all_match = all_match && match;
    }
    CAPTURE(path);
    EXPECT(crit, all_match);
  }
}

TEST_CASE("criterion 4: emitted designs are balanced and orthogonal") {
  Criterion crit(4, "X'X off-diagonal exactly zero (full k<=6, PB-12)", 5.0);
  auto factors = [](std::size_t k) {
    std::vector<Factor> out;
    for (std::size_t i = 0; i < k; ++i) {
      Factor f;
      f.name = "f" + std::to_string(i);
      f.source = FactorSource::LoopCap;
      f.param = "p" + std::to_string(i);
      f.low = 1;
      f.high = 2;
      out.push_back(f);
    }
    return out;
  };
  auto check_design = [&](const DesignMatrix& d) {
    for (std::size_t a = 0; a < d.factors.size(); ++a) {
      long balance = 0;
      for (const auto& row : d.rows) balance += row[a];
      EXPECT(crit, balance == 0);
      for (std::size_t b = a + 1; b < d.factors.size(); ++b) {
        long dot = 0;
        for (const auto& row : d.rows) dot += row[a] * row[b];
        EXPECT(crit, dot == 0);
      }
    }
  };
  for (std::size_t k = 1; k <= 6; ++k) check_design(full_factorial(factors(k)));
  for (std::size_t k = 1; k <= 11; ++k) check_design(plackett_burman(factors(k)));
}

TEST_CASE("criterion 5: exact effect recovery and screening on PB-12") {
  Criterion crit(5, "y=2A+5B -> effects (4,10) +/- 1e-9; tau=1 selects {A,B}",
                 5.0);
  std::vector<Factor> factors;
  for (int i = 0; i < 11; ++i) {
    Factor f;
    f.name = std::string(1, static_cast<char>('A' + i));
    f.source = FactorSource::LoopCap;
    f.param = "p" + std::to_string(i);
    f.low = 1;
    f.high = 2;
    factors.push_back(f);
  }
  DesignMatrix pb = plackett_burman(factors);
  std::vector<double> y;
  for (const auto& row : pb.rows) y.push_back(2.0 * row[0] + 5.0 * row[1]);
  auto effects = main_effects(pb, y);
  EXPECT(crit, std::abs(effects[0].second - 4.0) < 1e-9);
  EXPECT(crit, std::abs(effects[1].second - 10.0) < 1e-9);
  for (std::size_t i = 2; i < effects.size(); ++i) {
    EXPECT(crit, std::abs(effects[i].second) < 1e-9);
  }
  ScreenPolicy tau;
  tau.threshold = 1.0;
  auto selected = screen(effects, tau).selected;
  std::vector<std::string> expected{"A", "B"};
  EXPECT(crit, selected == expected);
}

TEST_CASE("criterion 6: least-squares recovery with residual orthogonality") {
  Criterion crit(6, "y=3a+5b+N(0,0.1^2): coef +/- 0.15, refit stable", 5.0);
  Rng rng(derive_seed(20240501, "ls-recovery"));
  Dataset data;
  data.feature_names = {"a", "b"};
  data.response_name = "y";
  for (int i = 0; i < 50; ++i) {
    double a = rng.uniform() * 4.0 - 2.0;
    double b = rng.uniform() * 4.0 - 2.0;
    data.features.push_back({a, b});
    data.response.push_back(3.0 * a + 5.0 * b + rng.normal(0.0, 0.1));
  }
  LinearModel m = fit_linear(data);
  EXPECT(crit, std::abs(m.coefficients[0] - 3.0) < 0.15);
  EXPECT(crit, std::abs(m.coefficients[1] - 5.0) < 0.15);

  // Residual orthogonality within 1e-8 (relative to the response scale).
  double scale = 0.0;
  for (double y : data.response) scale = std::max(scale, std::abs(y));
  for (std::size_t c = 0; c <= data.arity(); ++c) {
    double dot = 0.0;
    for (std::size_t r = 0; r < data.size(); ++r) {
      double x = c == 0 ? 1.0 : data.features[r][c - 1];
      dot += x * (data.response[r] - predict(m, data.features[r]));
    }
    EXPECT(crit, std::abs(dot) <= 1e-8 * scale * static_cast<double>(data.size()));
  }

  // Refit idempotence within 1e-9.
  Dataset projected = data;
  for (std::size_t r = 0; r < data.size(); ++r) {
    projected.response[r] = predict(m, data.features[r]);
  }
  LinearModel m2 = fit_linear(projected);
  EXPECT(crit, std::abs(m2.intercept - m.intercept) < 1e-9);
  EXPECT(crit, std::abs(m2.coefficients[0] - m.coefficients[0]) < 1e-9);
  EXPECT(crit, std::abs(m2.coefficients[1] - m.coefficients[1]) < 1e-9);
}

TEST_CASE("criterion 7: prediction-interval coverage is calibrated") {
  Criterion crit(7, "alpha=0.05 Monte Carlo coverage in [0.93, 0.97]", 10.0);
  Rng rng(derive_seed(424242, "pi-coverage"));
  int inside = 0, total = 0;
  for (int rep = 0; rep < 250; ++rep) {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.response_name = "y";
    for (int i = 0; i < 30; ++i) {
      double a = rng.uniform() * 8.0 - 4.0;
      double b = rng.uniform() * 8.0 - 4.0;
      d.features.push_back({a, b});
      d.response.push_back(1.0 + 2.0 * a - b + rng.normal(0.0, 2.0));
    }
    LinearModel m = fit_linear(d);
    for (int i = 0; i < 4; ++i) {
      double a = rng.uniform() * 8.0 - 4.0;
      double b = rng.uniform() * 8.0 - 4.0;
      double y = 1.0 + 2.0 * a - b + rng.normal(0.0, 2.0);
      auto [lo, hi] = prediction_interval(m, {a, b}, 0.05);
      if (y >= lo && y <= hi) ++inside;
      ++total;
    }
  }
  EXPECT(crit, total == 1000);
  double coverage = static_cast<double>(inside) / total;
  CAPTURE(coverage);
  EXPECT(crit, coverage >= 0.93);
  EXPECT(crit, coverage <= 0.97);
}

TEST_CASE("criterion 8: symbolic regression recovers x1 + x2") {
  Criterion crit(8, "5x5 grid, seed 42, default config: MSE < 1e-6", 60.0);
  Dataset data;
  data.feature_names = {"x1", "x2"};
  data.response_name = "y";
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      data.features.push_back({static_cast<double>(i), static_cast<double>(j)});
      data.response.push_back(static_cast<double>(i + j));
    }
  }
  GPConfig config;  // defaults: population 500, generations 100, depth 8
  config.seed = 42;
  ExprModel m = symbolic_regression(data, config);
  CAPTURE(to_prefix(*m.root, m.feature_names));
  EXPECT(crit, m.training_mse < 1e-6);
  // Elitism monotonicity asserted at every generation.
  EXPECT(crit, m.best_fitness_history.size() == config.generations + 1);
  for (std::size_t g = 1; g < m.best_fitness_history.size(); ++g) {
    EXPECT(crit, m.best_fitness_history[g] <= m.best_fitness_history[g - 1]);
  }
}

TEST_CASE("criterion 9: end-to-end macro-model quality on an affine-cost program") {
  Criterion crit(9, "pathsum 2^3 factorial: held-out MAPE < 5%", 60.0);
  // pathsum's cost weights zero out propagation, making deterministic_cost
  // an exact affine function of paths_completed by construction of the
  // executor's counters; the fitted model must recover the whole chain.
  PipelineConfig config =
      load_pipeline_config(verimodel::testing::corpus_path("pathsum.pipeline.json"));
  config.program_path = verimodel::testing::corpus_path("pathsum.mc");
  config.spec_path = verimodel::testing::corpus_path("pathsum.spec.json");
  config.factors_path = verimodel::testing::corpus_path("pathsum.factors.json");
  config.out_dir = fresh_dir("criterion9");
  config.deterministic = true;
  PipelineResult result = run_pipeline(config);

  CsvTable obs = read_csv(result.observations_path);
  EXPECT(crit, obs.rows.size() == 8);

  // The affinity claim itself: cost = a + b*paths exactly, same a and b on
  // every design row.
  std::size_t cost_col = obs.column("deterministic_cost");
  std::size_t paths_col = obs.column("paths_completed");
  std::vector<std::pair<double, double>> points;
  for (const auto& row : obs.rows) {
    points.push_back({std::stod(row[paths_col]), std::stod(row[cost_col])});
  }
  double b = (points[7].second - points[0].second) /
             (points[7].first - points[0].first);
  double a = points[0].second - b * points[0].first;
  for (const auto& [paths, cost] : points) {
    EXPECT(crit, std::abs(cost - (a + b * paths)) < 1e-9);
  }

  EXPECT(crit, std::holds_alternative<LinearModel>(result.model));
  CAPTURE(result.assessment.mape);
  EXPECT(crit, result.assessment.mape < 0.05);
}

TEST_CASE("criterion 10: deterministic pipeline runs are byte-identical") {
  Criterion crit(10, "two pipeline --deterministic runs, same seed", 60.0);
  auto configure = [&](const std::string& out) {
    PipelineConfig c = load_pipeline_config(
        verimodel::testing::corpus_path("loopsum.pipeline.json"));
    c.program_path = verimodel::testing::corpus_path("loopsum.mc");
    c.spec_path = verimodel::testing::corpus_path("loopsum.spec.json");
    c.factors_path = verimodel::testing::corpus_path("loopsum.factors.json");
    c.out_dir = out;
    c.deterministic = true;
    return c;
  };
  std::string out1 = fresh_dir("criterion10-a");
  std::string out2 = fresh_dir("criterion10-b");
  run_pipeline(configure(out1));
  run_pipeline(configure(out2));
  for (const char* name : {"design.csv", "observations.csv", "features.csv",
                           "screening.csv", "model.json", "assessment.txt",
                           "ranking.csv"}) {
    EXPECT(crit, slurp(out1 + "/" + name) == slurp(out2 + "/" + name));
  }
}
