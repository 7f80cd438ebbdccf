//===-- pipeline.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "verimodel/csv.hpp"
#include "verimodel/features.hpp"
#include "verimodel/parser.hpp"
#include "verimodel/rng.hpp"
#include "verimodel/validate.hpp"

namespace verimodel {

namespace {

using Json = nlohmann::json;

template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const RankDeficientError& e) {
    throw RankDeficientError(e.columns,
                             "stage '" + name + "': " + std::string(e.what()));
  } catch (const ToolError& e) {
    throw ToolError(e.kind, "stage '" + name + "': " + std::string(e.what()));
  }
}

// Numbers in reports print integers without a trailing ".0".
std::string pretty(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return format_number(v);
}

}  // namespace

PipelineConfig pipeline_config_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed pipeline config: ") + e.what());
  }
  PipelineConfig c;
  try {
    c.program_path = j.at("program").get<std::string>();
    c.spec_path = j.at("spec").get<std::string>();
    c.factors_path = j.at("factors").get<std::string>();
    c.design_kind = j.value("design", "full");
    c.entry = j.value("entry", "");
    c.response = j.value("response", "deterministic_cost");
    c.fit_kind = j.value("fit", "linear");
    c.fit_features = j.value("fit_features", std::vector<std::string>{});
    c.log_response = j.value("log_response", false);
    c.test_fraction = j.value("test_fraction", 0.25);
    c.alpha = j.value("alpha", 0.05);
    c.seed = j.value("seed", std::uint64_t{0});
    c.replicates = j.value("replicates", 0);
    c.out_dir = j.value("out_dir", "out");
    c.ranking_path = j.value("ranking", "");
    c.deterministic = j.value("deterministic", false);
    c.jobs = j.value("jobs", 1);
    c.variant_paths = j.value("variants", std::vector<std::string>{});
    if (j.contains("screen")) {
      const auto& s = j.at("screen");
      if (s.contains("threshold")) {
        c.screen_policy.threshold = s.at("threshold").get<double>();
      }
      if (s.contains("top_k")) {
        c.screen_policy.top_k = s.at("top_k").get<std::size_t>();
      }
    }
    if (j.contains("limits")) {
      const auto& l = j.at("limits");
      c.limits.max_paths = l.value("max_paths", c.limits.max_paths);
      c.limits.max_depth = l.value("max_depth", c.limits.max_depth);
      c.limits.max_loop_iterations =
          l.value("max_loop_iterations", c.limits.max_loop_iterations);
      c.limits.solver.max_splits =
          l.value("solver_split_cap", c.limits.solver.max_splits);
    }
    if (j.contains("passes")) {
      std::string names;
      for (const auto& p : j.at("passes")) {
        if (!names.empty()) names += ",";
        names += p.get<std::string>();
      }
      auto parsed = OptConfig::from_names(names);
      c.opt.passes = parsed.passes;
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.opt.max_body_copies = o.value("max_body_copies", c.opt.max_body_copies);
      c.opt.max_depth = o.value("max_inline_depth", c.opt.max_depth);
    }
    if (j.contains("cost_weights")) {
      const auto& w = j.at("cost_weights");
      c.weights.instruction = w.value("instruction", c.weights.instruction);
      c.weights.memory = w.value("memory", c.weights.memory);
      c.weights.fork = w.value("fork", c.weights.fork);
      c.weights.propagation = w.value("propagation", c.weights.propagation);
    }
    if (j.contains("gp")) {
      const auto& g = j.at("gp");
      c.gp.population = g.value("population", c.gp.population);
      c.gp.generations = g.value("generations", c.gp.generations);
      c.gp.tournament = g.value("tournament", c.gp.tournament);
      c.gp.crossover_prob = g.value("crossover_prob", c.gp.crossover_prob);
      c.gp.mutation_prob = g.value("mutation_prob", c.gp.mutation_prob);
      c.gp.max_depth = g.value("max_depth", c.gp.max_depth);
      c.gp.parsimony = g.value("parsimony", c.gp.parsimony);
    }
    if (j.contains("nominal")) {
      for (auto it = j.at("nominal").begin(); it != j.at("nominal").end(); ++it) {
        c.nominal[it.key()] = it.value().get<double>();
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pipeline config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return pipeline_config_from_json_text(text);
}

namespace {

DesignMatrix build_design(const std::string& kind,
                          const std::vector<Factor>& factors) {
  if (kind == "full") return full_factorial(factors);
  if (kind == "pb") return plackett_burman(factors);
  if (kind.rfind("frac:", 0) == 0) {
    int p = std::stoi(kind.substr(5));
    return fractional_factorial(factors, p);
  }
  throw ConfigError("unknown design kind: " + kind +
                    " (expected full, pb, or frac:<p>)");
}

std::string model_kind_name(const Model& model) {
  return std::holds_alternative<LinearModel>(model) ? "linear" : "expression";
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;

  // Configuration and inputs.
  Program program = stage("config", [&] {
    for (const std::string& path :
         {config.program_path, config.spec_path, config.factors_path}) {
      if (!fs::exists(path)) throw ConfigError("missing input file: " + path);
    }
    for (const std::string& path : config.variant_paths) {
      if (!fs::exists(path)) throw ConfigError("missing variant file: " + path);
    }
    Program p = parse_file(config.program_path);
    if (!config.entry.empty()) p.entry = config.entry;
    require_valid(p);
    return p;
  });
  SymbolSpec spec = stage("config", [&] {
    SymbolSpec s = load_spec(config.spec_path);
    if (!s.function.empty() && config.entry.empty()) program.entry = s.function;
    require_valid(program);
    s.validate_against(program.entry_function());
    return s;
  });
  std::vector<Factor> factors =
      stage("config", [&] { return load_factors(config.factors_path); });

  const std::string out = config.out_dir;
  const std::string seed_comment = " seed=" + std::to_string(config.seed);

  PipelineResult result;
  result.entry_name = program.entry;

  // Stage: optimize.
  ExperimentTemplate tmpl;
  tmpl.base_spec = spec;
  tmpl.limits = config.limits;
  stage("optimize", [&] {
    tmpl.program = optimize(program, config.opt);
    for (const std::string& path : config.variant_paths) {
      Program variant = parse_file(path);
      variant.entry = program.entry;
      require_valid(variant);
      tmpl.variants.push_back(optimize(variant, config.opt));
    }
    return 0;
  });

  // Stage: design.
  DesignMatrix design = stage("design", [&] {
    DesignMatrix d = build_design(config.design_kind, factors);
    CsvTable csv = design_to_csv(d);
    csv.comments.push_back(seed_comment);
    result.design_path = out + "/design.csv";
    write_csv(result.design_path, csv);
    return d;
  });

  // Stage: instantiate (with replication for noisy responses).
  int replicates = config.replicates;
  if (replicates <= 0) {
    replicates = config.response == "wall_time_ns" ? 3 : 1;
  }
  std::vector<Experiment> experiments = stage("instantiate", [&] {
    std::vector<Experiment> base = instantiate(design, tmpl);
    std::vector<Experiment> all;
    for (int rep = 0; rep < replicates; ++rep) {
      for (const Experiment& e : base) {
        Experiment copy = e;
        copy.run_index = static_cast<std::size_t>(rep) * base.size() + e.run_index;
        all.push_back(std::move(copy));
      }
    }
    return all;
  });

  // Stage: extract_features (white-box row per run).
  stage("extract_features", [&] {
    CsvTable csv;
    csv.comments.push_back(seed_comment);
    bool first = true;
    for (const Experiment& e : experiments) {
      FeatureVector fv =
          extract_features(e.program.entry_function(), e.spec);
      auto cols = feature_columns(fv);
      if (first) {
        csv.header.push_back("run_index");
        for (const auto& [name, _] : cols) csv.header.push_back(name);
        first = false;
      }
      std::vector<std::string> row;
      row.push_back(std::to_string(e.run_index));
      for (const auto& [_, value] : cols) row.push_back(format_number(value));
      csv.rows.push_back(std::move(row));
    }
    result.features_path = out + "/features.csv";
    write_csv(result.features_path, csv);
    return 0;
  });

  // Stage: run (black-box measurement, possibly parallel).
  std::vector<Observation> observations = stage("run", [&] {
    auto obs = run_experiments(experiments, config.weights, config.jobs);
    std::vector<std::string> factor_names;
    for (const auto& f : design.factors) factor_names.push_back(f.name);
    CsvTable csv =
        observations_to_csv(factor_names, obs, !config.deterministic);
    csv.comments.push_back(seed_comment);
    result.observations_path = out + "/observations.csv";
    write_csv(result.observations_path, csv);
    return obs;
  });

  // Stage: screen (main effects of the configured response).
  std::vector<std::string> screened = stage("screen", [&] {
    // Mean response per design row across replicates.
    std::vector<double> responses(design.rows.size(), 0.0);
    for (const Observation& o : observations) {
      std::size_t row = o.run_index % design.rows.size();
      double value = 0.0;
      if (config.response == "wall_time_ns") {
        value = static_cast<double>(o.wall_time_ns);
      } else if (config.response == "deterministic_cost") {
        value = static_cast<double>(o.deterministic_cost);
      } else if (config.response == "paths_completed") {
        value = static_cast<double>(o.paths_completed);
      } else if (config.response == "queries") {
        value = static_cast<double>(o.queries);
      } else if (config.response == "propagation_steps_total") {
        value = static_cast<double>(o.propagation_steps_total);
      } else {
        throw ConfigError("unknown response: " + config.response);
      }
      responses[row] += value / static_cast<double>(replicates);
    }
    auto effects = main_effects(design, responses);
    ScreenResult sr = screen(effects, config.screen_policy);

    CsvTable csv;
    csv.comments.push_back(seed_comment);
    if (!sr.warning.empty()) csv.comments.push_back(" warning: " + sr.warning);
    csv.header = {"factor", "effect", "selected"};
    for (const auto& [name, effect] : effects) {
      bool selected = std::find(sr.selected.begin(), sr.selected.end(), name) !=
                      sr.selected.end();
      csv.rows.push_back({name, format_number(effect), selected ? "1" : "0"});
    }
    result.screening_path = out + "/screening.csv";
    write_csv(result.screening_path, csv);
    return sr.selected;
  });
  result.screened_factors = screened;

  // Stage: fit (after a held-out split).
  CsvTable obs_csv = read_csv(result.observations_path);
  std::vector<std::string> fit_features = config.fit_features;
  if (fit_features.empty()) fit_features = screened;
  Dataset all_rows = stage("fit", [&] {
    if (fit_features.empty()) {
      throw FittingError("no fit features: screening selected nothing and "
                         "fit_features is empty");
    }
    Dataset d = dataset_from_csv(obs_csv, fit_features, config.response);
    if (config.log_response) d = log1p_response(d);
    return d;
  });

  SplitResult parts = stage("fit", [&] {
    return split(all_rows, config.test_fraction, derive_seed(config.seed, "split"));
  });

  Model model = stage("fit", [&]() -> Model {
    if (config.fit_kind == "linear") {
      LinearModel m = fit_linear(parts.train);
      m.seed = config.seed;
      return m;
    }
    if (config.fit_kind == "gp") {
      GPConfig gp = config.gp;
      gp.seed = derive_seed(config.seed, "gp");
      return symbolic_regression(parts.train, gp);
    }
    throw ConfigError("unknown fit kind: " + config.fit_kind);
  });
  stage("fit", [&] {
    result.model_path = out + "/model.json";
    save_model(result.model_path, model);
    return 0;
  });

  // Stage: assess (held-out rows only).
  AssessmentReport report = stage("assess", [&] {
    AssessmentReport r = assess(model, parts.test, config.alpha);
    r.train_indices = parts.train_indices;
    r.test_indices = parts.test_indices;
    r.split_seed = parts.seed;
    return r;
  });
  result.assessment = report;
  result.model = model;

  // Ranking entry at the nominal feature point.
  std::vector<double> nominal_point;
  for (const std::string& name : fit_features) {
    auto it = config.nominal.find(name);
    if (it != config.nominal.end()) {
      nominal_point.push_back(it->second);
      continue;
    }
    std::size_t col = obs_csv.column(name);
    double mean = 0.0;
    for (const auto& row : obs_csv.rows) mean += std::stod(row[col]);
    nominal_point.push_back(mean / static_cast<double>(obs_csv.rows.size()));
  }
  result.predicted_at_nominal = predict_model(model, nominal_point);
  if (config.log_response) {
    result.predicted_at_nominal = std::expm1(result.predicted_at_nominal);
  }

  stage("report", [&] {
    std::string response_label = config.log_response
                                     ? "log1p(" + config.response + ")"
                                     : config.response;
    std::string text = format_report(report, model, response_label);
    text += "seed: " + std::to_string(config.seed) + "\n";
    text += "entry: " + result.entry_name + "\n";
    text += "predicted cost at nominal point: " +
            pretty(result.predicted_at_nominal) + "\n";
    result.assessment_path = out + "/assessment.txt";
    write_text_atomic(result.assessment_path, text);

    RankingEntry entry;
    entry.function = result.entry_name;
    entry.model_kind = model_kind_name(model);
    entry.predicted_cost = result.predicted_at_nominal;
    entry.mape = report.mape;
    entry.rmse = report.rmse;
    entry.r_squared_test = report.r_squared_test;
    entry.interval_coverage = report.interval_coverage;
    entry.seed = config.seed;
    std::string ranking = config.ranking_path.empty() ? out + "/ranking.csv"
                                                      : config.ranking_path;
    append_ranking(ranking, entry);
    return 0;
  });

  return result;
}

std::string format_report(const AssessmentReport& report, const Model& model,
                          const std::string& response) {
  std::string text;
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    text += "model: " + response + " ≈ " + pretty(linear->intercept);
    for (std::size_t i = 0; i < linear->coefficients.size(); ++i) {
      double c = linear->coefficients[i];
      if (c < 0) {
        text += " − " + pretty(-c);
      } else {
        text += " + " + pretty(c);
      }
      text += "·" + linear->feature_names[i];
    }
    text += "\n";
    text += "fit: n=" + std::to_string(linear->n) +
            " residual_std=" + format_number(linear->residual_std) +
            " R²=" + format_number(linear->r_squared) + "\n";
  } else {
    const auto& expr = std::get<ExprModel>(model);
    text += "model: " + response + " ≈ " +
            to_prefix(*expr.root, expr.feature_names) + "\n";
    text += "fit: training MSE=" + format_number(expr.training_mse) +
            " nodes=" + std::to_string(expr.node_count) +
            " generations=" + std::to_string(expr.generations_run) + "\n";
  }
  text += "train rows: " + std::to_string(report.train_indices.size()) +
          ", test rows: " + std::to_string(report.test_indices.size()) + "\n";
  text += "MAPE: " + format_number(report.mape) + "\n";
  text += "RMSE: " + format_number(report.rmse) + "\n";
  text += "R² (test): " + format_number(report.r_squared_test) + "\n";
  text += "interval alpha: " + format_number(report.interval_alpha);
  if (report.interval_coverage) {
    text += ", coverage: " + format_number(*report.interval_coverage);
  }
  text += "\n";
  return text;
}

static const std::vector<std::string> kRankingHeader = {
    "function", "model_kind",     "predicted_cost",    "mape",
    "rmse",     "r_squared_test", "interval_coverage", "seed"};

std::vector<RankingEntry> read_ranking(const std::string& path) {
  std::vector<RankingEntry> out;
  if (!std::filesystem::exists(path)) return out;
  CsvTable csv = read_csv(path);
  for (const auto& row : csv.rows) {
    RankingEntry e;
    e.function = row[0];
    e.model_kind = row[1];
    e.predicted_cost = std::stod(row[2]);
    e.mape = std::stod(row[3]);
    e.rmse = std::stod(row[4]);
    e.r_squared_test = std::stod(row[5]);
    if (row[6] != "-") e.interval_coverage = std::stod(row[6]);
    if (row.size() > 7) e.seed = std::stoull(row[7]);
    out.push_back(std::move(e));
  }
  return out;
}

void ensure_ranking_file(const std::string& path) {
  if (std::filesystem::exists(path)) return;
  CsvTable csv;
  csv.header = kRankingHeader;
  write_csv(path, csv);
}

void append_ranking(const std::string& path, const RankingEntry& entry) {
  std::vector<RankingEntry> entries = read_ranking(path);
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [&](const RankingEntry& e) {
                                 return e.function == entry.function;
                               }),
                entries.end());
  entries.push_back(entry);
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankingEntry& a, const RankingEntry& b) {
                     return a.predicted_cost > b.predicted_cost;
                   });
  CsvTable csv;
  csv.header = kRankingHeader;
  for (const auto& e : entries) {
    csv.rows.push_back({e.function, e.model_kind, format_number(e.predicted_cost),
                        format_number(e.mape), format_number(e.rmse),
                        format_number(e.r_squared_test),
                        e.interval_coverage ? format_number(*e.interval_coverage)
                                            : "-",
                        std::to_string(e.seed)});
  }
  write_csv(path, csv);
}

}  // namespace verimodel
