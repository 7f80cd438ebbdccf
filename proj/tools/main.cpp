//===-- main.cpp - The verimodel command line ---------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "verimodel/csv.hpp"
#include "verimodel/doe.hpp"
#include "verimodel/features.hpp"
#include "verimodel/model_io.hpp"
#include "verimodel/optimizer.hpp"
#include "verimodel/parser.hpp"
#include "verimodel/pipeline.hpp"
#include "verimodel/rng.hpp"
#include "verimodel/validate.hpp"

using namespace verimodel;

namespace {

// Exit codes: 0 ok, 2 config, 3 parse/validate, 4 runtime limit, 5 fitting.
int exit_code(const ToolError& e) {
  switch (e.kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Frontend: return 3;
    case ErrorKind::RuntimeLimit: return 4;
    case ErrorKind::Fitting: return 5;
  }
  return 1;
}

std::uint64_t fallback_seed() {
  if (const char* env = std::getenv("VERIMODEL_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

Program load_program(const std::string& path, const std::string& entry) {
  Program p = parse_file(path);
  if (!entry.empty()) p.entry = entry;
  require_valid(p);
  return p;
}

struct LimitFlags {
  std::uint64_t max_paths = Limits{}.max_paths;
  std::uint64_t max_depth = Limits{}.max_depth;
  std::uint64_t max_loop_iterations = Limits{}.max_loop_iterations;
  std::uint64_t solver_split_cap = SolverLimits{}.max_splits;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-paths", max_paths, "Path budget");
    cmd->add_option("--max-depth", max_depth, "Branch decisions per path");
    cmd->add_option("--max-loop-iterations", max_loop_iterations,
                    "Iterations per loop per path");
    cmd->add_option("--solver-split-cap", solver_split_cap,
                    "Solver split budget per query");
  }

  Limits to_limits() const {
    Limits l;
    l.max_paths = max_paths;
    l.max_depth = max_depth;
    l.max_loop_iterations = max_loop_iterations;
    l.solver.max_splits = solver_split_cap;
    return l;
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_analyze(const std::string& program_path, const std::string& spec_path,
                const std::string& entry, bool raw) {
  Program p = load_program(program_path, entry);
  SymbolSpec spec = load_spec(spec_path);
  if (!spec.function.empty() && entry.empty()) {
    p.entry = spec.function;
    require_valid(p);
  }
  if (!raw) p = optimize(p, OptConfig{});
  spec.validate_against(p.entry_function());
  FeatureVector fv = extract_features(p.entry_function(), spec);
  auto cols = feature_columns(fv);
  std::string header, row;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) {
      header += ",";
      row += ",";
    }
    header += cols[i].first;
    row += format_number(cols[i].second);
  }
  std::cout << header << "\n" << row << "\n";
  return 0;
}

int cmd_optimize(const std::string& program_path, const std::string& passes,
                 const std::string& entry) {
  Program p = load_program(program_path, entry);
  OptConfig cfg = passes.empty() ? OptConfig{} : OptConfig::from_names(passes);
  std::vector<OptNote> notes;
  auto trace = pass_trace(p, cfg, nullptr);
  Program q = optimize(p, cfg, &notes);
  std::cout << print_program(q);
  // Trace and notes print as comments so the output stays parseable.
  for (const auto& t : trace) {
    std::cout << "// pass " << t.pass << ": " << t.size_before << " -> "
              << t.size_after << " nodes\n";
  }
  for (const auto& n : notes) {
    std::cout << "// note " << n.pass << " at " << n.loc.line << ":" << n.loc.col
              << ": " << n.message << "\n";
  }
  return 0;
}

// Query files: one `name in [lo, hi]` declaration or relational atom per
// line; blank lines and // comments are skipped.
int cmd_solve(const std::string& query_path, std::uint64_t split_cap) {
  std::ifstream in(query_path);
  if (!in) throw ConfigError("cannot open query file: " + query_path);
  DomainMap domains;
  Constraint constraint;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line.substr(0, line.find("//"));
    if (trimmed.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto in_pos = trimmed.find(" in ");
    if (in_pos != std::string::npos &&
        trimmed.find('[') != std::string::npos) {
      std::string name = trimmed.substr(0, in_pos);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      auto lb = trimmed.find('[');
      auto comma = trimmed.find(',', lb);
      auto rb = trimmed.find(']', comma);
      if (comma == std::string::npos || rb == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected `name in [lo, hi]`");
      }
      std::int64_t lo = std::stoll(trimmed.substr(lb + 1, comma - lb - 1));
      std::int64_t hi = std::stoll(trimmed.substr(comma + 1, rb - comma - 1));
      domains.declare(name, lo, hi);
      continue;
    }
    ExprRef e = parse_expr_text(trimmed);
    const auto* bin = std::get_if<BinaryExpr>(&e->node);
    if (!bin || !is_comparison(bin->op)) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected a relational atom");
    }
    RelOp op = bin->op == BinaryOp::Lt   ? RelOp::Lt
               : bin->op == BinaryOp::Le ? RelOp::Le
               : bin->op == BinaryOp::Eq ? RelOp::Eq
                                         : RelOp::Ne;
    constraint.atoms.push_back(Atom{bin->lhs, op, bin->rhs});
  }
  SolverLimits limits;
  limits.max_splits = split_cap;
  SolverResult r = decide(constraint, domains, limits);
  std::cout << "atoms: " << constraint.atom_count()
            << ", variables: " << constraint.var_count() << "\n";
  switch (r.status) {
    case SolveStatus::Sat:
      std::cout << "SAT\n";
      for (const auto& [name, value] : r.witness) {
        std::cout << "  " << name << " = " << value << "\n";
      }
      break;
    case SolveStatus::Unsat: std::cout << "UNSAT\n"; break;
    case SolveStatus::BudgetExceeded:
      std::cout << "BUDGET EXCEEDED\n";
      break;
  }
  std::cout << "propagation_steps: " << r.propagation_steps
            << ", splits: " << r.splits << "\n";
  if (r.status == SolveStatus::BudgetExceeded) {
    throw ToolError(ErrorKind::RuntimeLimit, "solver split budget exceeded");
  }
  return 0;
}

int cmd_run(const std::string& program_path, const std::string& spec_path,
            const std::string& entry, const std::string& out_path,
            const LimitFlags& limits, bool deterministic) {
  Program p = load_program(program_path, entry);
  SymbolSpec spec = load_spec(spec_path);
  if (!spec.function.empty() && entry.empty()) {
    p.entry = spec.function;
    require_valid(p);
  }
  spec.validate_against(p.entry_function());
  CostReport report = execute(p, spec, limits.to_limits());

  Observation o;
  o.run_index = 0;
  o.wall_time_ns = report.wall_time_ns;
  o.deterministic_cost = report.deterministic_cost;
  o.paths_completed = static_cast<std::int64_t>(report.stats.paths_completed);
  o.queries = static_cast<std::int64_t>(report.stats.queries);
  o.propagation_steps_total =
      static_cast<std::int64_t>(report.stats.propagation_steps_total);
  o.status = report.stats.paths_truncated > 0 ? "truncated" : "ok";

  // Append-only: continue the run_index sequence of an existing file.
  CsvTable csv;
  if (std::ifstream probe(out_path); probe.good()) {
    csv = read_csv(out_path);
    std::int64_t max_index = -1;
    std::size_t idx_col = csv.column("run_index");
    for (const auto& row : csv.rows) {
      max_index =
          std::max<std::int64_t>(max_index, std::stoll(row[idx_col]));
    }
    o.run_index = static_cast<std::size_t>(max_index + 1);
  } else {
    csv = observations_to_csv({}, {}, !deterministic);
  }
  CsvTable one = observations_to_csv({}, {o}, !deterministic);
  if (one.header != csv.header) {
    throw ConfigError("existing observation file has a different schema");
  }
  csv.rows.push_back(one.rows[0]);
  write_csv(out_path, csv);
  std::cout << "run " << o.run_index << ": paths=" << o.paths_completed
            << " cost=" << o.deterministic_cost << " status=" << o.status
            << "\n";
  return 0;
}

int cmd_design(const std::string& factors_path, const std::string& kind,
               const std::string& out_path) {
  auto factors = load_factors(factors_path);
  DesignMatrix d;
  if (kind == "full") {
    d = full_factorial(factors);
  } else if (kind == "pb") {
    d = plackett_burman(factors);
  } else if (kind.rfind("frac:", 0) == 0) {
    d = fractional_factorial(factors, std::stoi(kind.substr(5)));
  } else {
    throw ConfigError("unknown design kind: " + kind);
  }
  CsvTable csv = design_to_csv(d);
  if (out_path.empty()) {
    std::cout << csv_to_string(csv);
  } else {
    write_csv(out_path, csv);
    std::cout << d.kind << " design with " << d.rows.size() << " runs -> "
              << out_path << "\n";
  }
  return 0;
}

int cmd_run_design(const std::string& program_path, const std::string& spec_path,
                   const std::string& factors_path, const std::string& kind,
                   const std::string& entry, const std::string& out_path,
                   const LimitFlags& limits, int jobs, int replicates,
                   bool deterministic) {
  Program p = load_program(program_path, entry);
  SymbolSpec spec = load_spec(spec_path);
  if (!spec.function.empty() && entry.empty()) {
    p.entry = spec.function;
    require_valid(p);
  }
  auto factors = load_factors(factors_path);
  DesignMatrix d;
  if (kind == "full") {
    d = full_factorial(factors);
  } else if (kind == "pb") {
    d = plackett_burman(factors);
  } else if (kind.rfind("frac:", 0) == 0) {
    d = fractional_factorial(factors, std::stoi(kind.substr(5)));
  } else {
    throw ConfigError("unknown design kind: " + kind);
  }
  ExperimentTemplate tmpl{p, spec, limits.to_limits(), {}};
  auto base = instantiate(d, tmpl);
  std::vector<Experiment> all;
  if (replicates < 1) replicates = 1;
  for (int rep = 0; rep < replicates; ++rep) {
    for (const auto& e : base) {
      Experiment copy = e;
      copy.run_index = static_cast<std::size_t>(rep) * base.size() + e.run_index;
      all.push_back(std::move(copy));
    }
  }
  auto obs = run_experiments(all, CostWeights{}, jobs);
  std::vector<std::string> names;
  for (const auto& f : d.factors) names.push_back(f.name);
  write_csv(out_path, observations_to_csv(names, obs, !deterministic));
  std::cout << obs.size() << " observations -> " << out_path << "\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& response,
            const std::string& kind, const std::string& features,
            const std::string& out_path, std::uint64_t seed,
            bool log_response) {
  CsvTable csv = read_csv(data_path);
  std::vector<std::string> feature_names;
  if (!features.empty()) {
    feature_names = split_list(features);
  } else {
    // Default features: every column that is not bookkeeping or a response.
    for (const auto& col : csv.header) {
      if (col == "run_index" || col == "status" || col == "wall_time_ns" ||
          col == "deterministic_cost" || col == "paths_completed" ||
          col == "queries" || col == "propagation_steps_total") {
        continue;
      }
      feature_names.push_back(col);
    }
  }
  Dataset data = dataset_from_csv(csv, feature_names, response);
  if (log_response) data = log1p_response(data);
  Model model = [&]() -> Model {
    if (kind == "linear") {
      LinearModel m = fit_linear(data);
      m.seed = seed;
      return m;
    }
    if (kind == "gp") {
      GPConfig gp;
      gp.seed = derive_seed(seed, "gp");
      return symbolic_regression(data, gp);
    }
    throw ConfigError("unknown fit kind: " + kind);
  }();
  save_model(out_path, model);
  std::cout << "fitted " << kind << " model on " << data.size() << " rows -> "
            << out_path << "\n";
  return 0;
}

int cmd_assess(const std::string& model_path, const std::string& data_path,
               double alpha) {
  Model model = load_model(model_path);
  CsvTable csv = read_csv(data_path);
  const Dataset& train = model_training_data(model);
  Dataset test = dataset_from_csv(csv, model_feature_names(model),
                                  train.response_name.empty()
                                      ? std::string("deterministic_cost")
                                      : train.response_name);
  AssessmentReport report = assess(model, test, alpha);
  std::cout << format_report(report, model, test.response_name);
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& features) {
  Model model = load_model(model_path);
  std::vector<double> x;
  for (const auto& item : split_list(features)) x.push_back(std::stod(item));
  std::cout << format_number(predict_model(model, x)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verimodel - verification-time macro-modeling toolkit"};
  app.require_subcommand(1);

  std::string program_path, spec_path, factors_path, entry, out_path;
  std::string passes, kind = "full", response = "deterministic_cost";
  std::string fit_kind = "linear", features, model_path, data_path, config_path;
  double alpha = 0.05;
  std::uint64_t seed = fallback_seed();
  std::uint64_t split_cap = SolverLimits{}.max_splits;
  int jobs = 1, replicates = 1;
  bool deterministic = false, raw = false, log_response = false;
  LimitFlags limits;

  auto* analyze = app.add_subcommand("analyze", "Static feature extraction");
  analyze->add_option("program", program_path)->required();
  analyze->add_option("--spec", spec_path)->required();
  analyze->add_option("--entry", entry);
  analyze->add_flag("--raw", raw, "Analyze without optimizing first");

  auto* opt = app.add_subcommand("optimize", "Print optimized source and trace");
  opt->add_option("program", program_path)->required();
  opt->add_option("--passes", passes, "Comma-separated pass list");
  opt->add_option("--entry", entry);

  auto* solve = app.add_subcommand("solve", "Decide a constraint query file");
  solve->add_option("query", data_path)->required();
  solve->add_option("--solver-split-cap", split_cap);

  auto* run = app.add_subcommand("run", "Execute one symbolic run");
  run->add_option("program", program_path)->required();
  run->add_option("--spec", spec_path)->required();
  run->add_option("--entry", entry);
  run->add_option("--out", out_path)->required();
  run->add_flag("--deterministic", deterministic);
  limits.attach(run);

  auto* design = app.add_subcommand("design", "Emit a design matrix CSV");
  design->add_option("--factors", factors_path)->required();
  design->add_option("--kind", kind, "full | frac:<p> | pb");
  design->add_option("--out", out_path);

  auto* rd = app.add_subcommand("run-design", "Instantiate and run a design");
  rd->add_option("--program", program_path)->required();
  rd->add_option("--spec", spec_path)->required();
  rd->add_option("--factors", factors_path)->required();
  rd->add_option("--kind", kind);
  rd->add_option("--entry", entry);
  rd->add_option("--out", out_path)->required();
  rd->add_option("--jobs", jobs);
  rd->add_option("--replicates", replicates);
  rd->add_flag("--deterministic", deterministic);
  limits.attach(rd);

  auto* fit = app.add_subcommand("fit", "Fit a macro-model from observations");
  fit->add_option("--data", data_path)->required();
  fit->add_option("--response", response);
  fit->add_option("--kind", fit_kind, "linear | gp");
  fit->add_option("--features", features, "Comma-separated feature columns");
  fit->add_option("--out", out_path)->required();
  fit->add_option("--seed", seed);
  fit->add_flag("--log-response", log_response,
                "Fit log(1+response) instead of the raw response");

  auto* assess_cmd = app.add_subcommand("assess", "Assess a model on held-out data");
  assess_cmd->add_option("--model", model_path)->required();
  assess_cmd->add_option("--data", data_path)->required();
  assess_cmd->add_option("--alpha", alpha);

  auto* predict_cmd = app.add_subcommand("predict", "Predict at a feature point");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--features", features)->required();

  auto* pipe = app.add_subcommand("pipeline", "Run the full pipeline");
  pipe->add_option("--config", config_path)->required();
  auto* pipe_seed = pipe->add_option("--seed", seed);
  auto* pipe_out = pipe->add_option("--out", out_path);
  auto* pipe_resp = pipe->add_option("--response", response);
  auto* pipe_jobs = pipe->add_option("--jobs", jobs);
  auto* pipe_design = pipe->add_option("--design", kind, "full | frac:<p> | pb");
  auto* pipe_fit = pipe->add_option("--fit", fit_kind, "linear | gp");
  auto* pipe_alpha = pipe->add_option("--alpha", alpha);
  auto* pipe_entry = pipe->add_option("--entry", entry);
  double test_fraction = 0.25;
  auto* pipe_frac = pipe->add_option("--test-fraction", test_fraction);
  pipe->add_flag("--log-response", log_response);
  pipe->add_flag("--deterministic", deterministic);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(program_path, spec_path, entry, raw);
    if (opt->parsed()) return cmd_optimize(program_path, passes, entry);
    if (solve->parsed()) return cmd_solve(data_path, split_cap);
    if (run->parsed()) {
      return cmd_run(program_path, spec_path, entry, out_path, limits,
                     deterministic);
    }
    if (design->parsed()) return cmd_design(factors_path, kind, out_path);
    if (rd->parsed()) {
      return cmd_run_design(program_path, spec_path, factors_path, kind, entry,
                            out_path, limits, jobs, replicates, deterministic);
    }
    if (fit->parsed()) {
      return cmd_fit(data_path, response, fit_kind, features, out_path, seed,
                     log_response);
    }
    if (assess_cmd->parsed()) return cmd_assess(model_path, data_path, alpha);
    if (predict_cmd->parsed()) return cmd_predict(model_path, features);
    if (pipe->parsed()) {
      PipelineConfig config = load_pipeline_config(config_path);
      if (config.seed == 0) config.seed = fallback_seed();
      if (pipe_seed->count() > 0) config.seed = seed;
      if (pipe_out->count() > 0) config.out_dir = out_path;
      if (pipe_resp->count() > 0) config.response = response;
      if (pipe_jobs->count() > 0) config.jobs = jobs;
      if (pipe_design->count() > 0) config.design_kind = kind;
      if (pipe_fit->count() > 0) config.fit_kind = fit_kind;
      if (pipe_alpha->count() > 0) config.alpha = alpha;
      if (pipe_entry->count() > 0) config.entry = entry;
      if (pipe_frac->count() > 0) config.test_fraction = test_fraction;
      if (log_response) config.log_response = true;
      if (deterministic) config.deterministic = true;
      PipelineResult result = run_pipeline(config);
      std::cout << format_report(result.assessment, result.model,
                                 config.response);
      std::cout << "artifacts in " << config.out_dir << "\n";
      return 0;
    }
  } catch (const ToolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
