//===-- test_doe.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support/oracle.hpp"
#include "verimodel/doe.hpp"
#include "verimodel/parser.hpp"

using namespace verimodel;

namespace {

std::vector<Factor> coded_factors(std::size_t k) {
  std::vector<Factor> out;
  for (std::size_t i = 0; i < k; ++i) {
    Factor f;
    f.name = std::string(1, static_cast<char>('A' + i));
    f.source = FactorSource::DomainWidth;
    f.param = "p" + std::to_string(i);
    f.low = 1;
    f.high = 2;
    out.push_back(std::move(f));
  }
  return out;
}

// Dot product of two coded columns.
long column_dot(const DesignMatrix& d, std::size_t a, std::size_t b) {
  long acc = 0;
  for (const auto& row : d.rows) acc += row[a] * row[b];
  return acc;
}

bool balanced(const DesignMatrix& d, std::size_t col) {
  long plus = 0, minus = 0;
  for (const auto& row : d.rows) (row[col] > 0 ? plus : minus) += 1;
  return plus == minus;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("full factorial: 2^k rows, lexicographic, balanced, orthogonal") {
  auto d3 = full_factorial(coded_factors(3));
  CHECK(d3.rows.size() == 8);
  CHECK(d3.rows.front() == std::vector<int>{-1, -1, -1});
  CHECK(d3.rows.back() == std::vector<int>{+1, +1, +1});
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(balanced(d3, a));
    for (std::size_t b = a + 1; b < 3; ++b) {
      CHECK(column_dot(d3, a, b) == 0);
    }
  }

  auto d1 = full_factorial(coded_factors(1));
  REQUIRE(d1.rows.size() == 2);
  CHECK(d1.rows[0] == std::vector<int>{-1});
  CHECK(d1.rows[1] == std::vector<int>{+1});

  CHECK_THROWS_AS(full_factorial(coded_factors(17)), TooManyFactorsError);
}

TEST_CASE("Plackett-Burman 12: balanced and pairwise orthogonal") {
  auto d = plackett_burman(coded_factors(11));
  REQUIRE(d.rows.size() == 12);
  for (std::size_t c = 0; c < 11; ++c) {
    CHECK(balanced(d, c));
    for (std::size_t b = c + 1; b < 11; ++b) {
      CHECK(column_dot(d, c, b) == 0);
    }
  }
  // Projection to one factor stays balanced over 12 runs.
  auto d1 = plackett_burman(coded_factors(1));
  REQUIRE(d1.rows.size() == 12);
  CHECK(balanced(d1, 0));

  CHECK_THROWS_AS(plackett_burman(coded_factors(12)), TooManyFactorsError);
}

TEST_CASE("fractional factorial: generator products and degenerate fraction") {
  auto half = fractional_factorial(coded_factors(3), 1);
  REQUIRE(half.rows.size() == 4);
  for (const auto& row : half.rows) {
    CHECK(row[2] == row[0] * row[1]);  // C = A*B
  }

  auto d8 = fractional_factorial(coded_factors(4), 1);
  REQUIRE(d8.rows.size() == 8);
  for (const auto& row : d8.rows) {
    CHECK(row[3] == row[0] * row[1] * row[2]);  // D = A*B*C
  }

  auto full = fractional_factorial(coded_factors(3), 0);
  CHECK(full.rows == full_factorial(coded_factors(3)).rows);

  CHECK_THROWS_AS(fractional_factorial(coded_factors(3), 3), InvalidFractionError);
}

TEST_CASE("main effects recover planted responses") {
  auto d2 = full_factorial(coded_factors(2));
  std::vector<double> y;
  for (const auto& row : d2.rows) y.push_back(3.0 * row[0]);
  auto effects = main_effects(d2, y);
  REQUIRE(effects.size() == 2);
  CHECK(effects[0].second == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(effects[1].second == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> constant(d2.rows.size(), 7.0);
  for (const auto& [name, e] : main_effects(d2, constant)) {
    CHECK(e == 0.0);
  }

  // y = 2A + 5B over PB-12: orthogonality makes the recovery exact.
  auto pb = plackett_burman(coded_factors(11));
  std::vector<double> planted;
  for (const auto& row : pb.rows) {
    planted.push_back(2.0 * row[0] + 5.0 * row[1]);
  }
  auto pb_effects = main_effects(pb, planted);
  CHECK(std::abs(pb_effects[0].second - 4.0) < 1e-9);
  CHECK(std::abs(pb_effects[1].second - 10.0) < 1e-9);
  for (std::size_t i = 2; i < pb_effects.size(); ++i) {
    CHECK(std::abs(pb_effects[i].second) < 1e-9);
  }

  CHECK_THROWS_AS(main_effects(d2, std::vector<double>{1.0}),
                  LengthMismatchError);
}

TEST_CASE("screening selects by threshold and by top-k") {
  std::vector<std::pair<std::string, double>> effects{
      {"A", 6.0}, {"B", 0.1}, {"C", 5.9}};
  ScreenPolicy tau;
  tau.threshold = 1.0;
  auto r1 = screen(effects, tau);
  CHECK(r1.selected == std::vector<std::string>{"A", "C"});

  ScreenPolicy top1;
  top1.top_k = 1;
  auto r2 = screen(effects, top1);
  CHECK(r2.selected == std::vector<std::string>{"A"});

  std::vector<std::pair<std::string, double>> zero{{"A", 0.0}, {"B", 0.0}};
  auto r3 = screen(zero, ScreenPolicy{});
  CHECK(r3.selected.empty());
  CHECK_FALSE(r3.warning.empty());

  // tau = 0 keeps every factor with a nonzero effect.
  ScreenPolicy tau0;
  tau0.threshold = 0.0;
  std::vector<std::pair<std::string, double>> mixed{
      {"A", 0.5}, {"B", 0.0}, {"C", -0.25}};
  auto r4 = screen(mixed, tau0);
  CHECK(r4.selected == std::vector<std::string>{"A", "C"});

  // An over-tight threshold still returns the strongest factor.
  ScreenPolicy huge;
  huge.threshold = 100.0;
  auto r5 = screen(mixed, huge);
  CHECK(r5.selected == std::vector<std::string>{"A"});
}

TEST_CASE("instantiate decodes factor settings onto spec, program and limits") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("loopsum.mc")));
  SymbolSpec spec = load_spec(verimodel::testing::corpus_path("loopsum.spec.json"));

  Factor width;
  width.name = "width_n";
  width.source = FactorSource::DomainWidth;
  width.param = "n";
  width.low = 1;
  width.high = 8;

  Factor cap;
  cap.name = "cap";
  cap.source = FactorSource::LoopCap;
  cap.low = 4;
  cap.high = 64;

  ExperimentTemplate tmpl{p, spec, Limits{}, {}};
  auto design = full_factorial({width, cap});
  auto experiments = instantiate(design, tmpl);
  REQUIRE(experiments.size() == 4);

  // Row [+1, .]: width 8 decodes to the domain [0, 7].
  const Experiment& hi = experiments[3];
  CHECK(hi.spec.scalars.at("n").lo == 0);
  CHECK(hi.spec.scalars.at("n").hi == 7);
  CHECK(hi.limits.max_loop_iterations == 64);
  const Experiment& lo = experiments[0];
  CHECK(lo.spec.scalars.at("n").lo == 0);
  CHECK(lo.spec.scalars.at("n").hi == 0);
  CHECK(lo.limits.max_loop_iterations == 4);

  // Injectivity: distinct rows produce distinct configurations.
  for (std::size_t a = 0; a < experiments.size(); ++a) {
    for (std::size_t b = a + 1; b < experiments.size(); ++b) {
      CHECK(experiments[a].settings != experiments[b].settings);
    }
  }
}

TEST_CASE("array-size factors rebuild the signature") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("maxarray.mc")));
  SymbolSpec spec = load_spec(verimodel::testing::corpus_path("maxarray.spec.json"));

  Factor size;
  size.name = "len_a";
  size.source = FactorSource::ArraySize;
  size.param = "a";
  size.low = 4;
  size.high = 16;

  auto design = full_factorial({size});
  auto experiments = instantiate(design, ExperimentTemplate{p, spec, Limits{}, {}});
  REQUIRE(experiments.size() == 2);
  CHECK(*experiments[0].program.entry_function().find_param("a")->array_length == 4);
  CHECK(*experiments[1].program.entry_function().find_param("a")->array_length == 16);
}

TEST_CASE("unresolvable factors are rejected by name") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("loopsum.mc")));
  SymbolSpec spec = load_spec(verimodel::testing::corpus_path("loopsum.spec.json"));
  Factor bogus;
  bogus.name = "width_zz";
  bogus.source = FactorSource::DomainWidth;
  bogus.param = "zz";
  bogus.low = 1;
  bogus.high = 4;
  auto design = full_factorial({bogus});
  CHECK_THROWS_AS(instantiate(design, ExperimentTemplate{p, spec, Limits{}, {}}),
                  UnresolvableFactorError);
}

TEST_CASE("running an instantiated design produces ordered observations") {
  Program p = parse_program(slurp(verimodel::testing::corpus_path("loopsum.mc")));
  SymbolSpec spec = load_spec(verimodel::testing::corpus_path("loopsum.spec.json"));
  Factor width;
  width.name = "width_n";
  width.source = FactorSource::DomainWidth;
  width.param = "n";
  width.low = 1;
  width.high = 8;
  auto design = full_factorial({width});
  auto experiments = instantiate(design, ExperimentTemplate{p, spec, Limits{}, {}});
  auto obs = run_experiments(experiments, CostWeights{}, 2);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].run_index == 0);
  CHECK(obs[1].run_index == 1);
  CHECK(obs[0].status == "ok");
  // Width 1 pins n = 0: a single path. Width 8 explores eight paths.
  CHECK(obs[0].paths_completed == 1);
  CHECK(obs[1].paths_completed == 8);
  CHECK(obs[1].deterministic_cost > obs[0].deterministic_cost);

  auto csv = observations_to_csv({"width_n"}, obs, false);
  CHECK(csv.header ==
        std::vector<std::string>{"run_index", "width_n", "deterministic_cost",
                                 "paths_completed", "queries",
                                 "propagation_steps_total", "status"});
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][1] == "1");
  CHECK(csv.rows[1][1] == "8");
}

TEST_CASE("design CSV uses coded levels") {
  auto d = full_factorial(coded_factors(2));
  auto csv = design_to_csv(d);
  CHECK(csv.header == std::vector<std::string>{"run_index", "A", "B"});
  REQUIRE(csv.rows.size() == 4);
  CHECK(csv.rows[0] == std::vector<std::string>{"0", "-1", "-1"});
  CHECK(csv.rows[3] == std::vector<std::string>{"3", "1", "1"});
  // Round trip through the CSV text form.
  CsvTable back = csv_from_string(csv_to_string(csv));
  CHECK(back.header == csv.header);
  CHECK(back.rows == csv.rows);
}

TEST_CASE("duplicate factor sources are rejected at design construction") {
  auto factors = coded_factors(2);
  factors[1].param = factors[0].param;  // same setting varied twice
  CHECK_THROWS_AS(full_factorial(factors), ConfigError);
}
