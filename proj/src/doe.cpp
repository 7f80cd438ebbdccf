//===-- doe.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/doe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace verimodel {

const char* to_string(FactorSource s) {
  switch (s) {
    case FactorSource::ScalarValue: return "scalar-value";
    case FactorSource::DomainWidth: return "domain-width";
    case FactorSource::ArraySize: return "array-size";
    case FactorSource::LoopCap: return "loop-cap";
    case FactorSource::StaticFeature: return "static-feature";
  }
  return "?";
}

namespace {

FactorSource source_from_string(const std::string& s) {
  if (s == "scalar-value") return FactorSource::ScalarValue;
  if (s == "domain-width") return FactorSource::DomainWidth;
  if (s == "array-size") return FactorSource::ArraySize;
  if (s == "loop-cap") return FactorSource::LoopCap;
  if (s == "static-feature") return FactorSource::StaticFeature;
  throw ConfigError("unknown factor source: " + s);
}

void check_factors(const std::vector<Factor>& factors) {
  for (const auto& f : factors) {
    if (f.low >= f.high) {
      throw ConfigError("factor '" + f.name + "' needs low < high");
    }
  }
  // A factor's source must uniquely identify what it varies.
  for (std::size_t i = 0; i < factors.size(); ++i) {
    for (std::size_t j = i + 1; j < factors.size(); ++j) {
      if (factors[i].name == factors[j].name) {
        throw ConfigError("duplicate factor name '" + factors[i].name + "'");
      }
      if (factors[i].source == factors[j].source &&
          factors[i].param == factors[j].param) {
        throw ConfigError("factors '" + factors[i].name + "' and '" +
                          factors[j].name + "' vary the same setting");
      }
    }
  }
}

}  // namespace

std::vector<Factor> factors_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed factors file: ") + e.what());
  }
  std::vector<Factor> out;
  try {
    for (const auto& item : j) {
      Factor f;
      f.name = item.at("name").get<std::string>();
      f.source = source_from_string(item.at("source").get<std::string>());
      if (f.source == FactorSource::StaticFeature) {
        f.param = item.value("feature", "");
      } else if (f.source != FactorSource::LoopCap) {
        f.param = item.at("param").get<std::string>();
      }
      f.low = item.at("low").get<std::int64_t>();
      f.high = item.at("high").get<std::int64_t>();
      out.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed factors file: ") + e.what());
  }
  return out;
}

std::vector<Factor> load_factors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open factors file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return factors_from_json_text(text);
}

DesignMatrix full_factorial(const std::vector<Factor>& factors) {
  const std::size_t k = factors.size();
  if (k < 1 || k > 16) {
    throw TooManyFactorsError("full factorial supports 1..16 factors, got " +
                              std::to_string(k));
  }
  check_factors(factors);
  DesignMatrix d;
  d.factors = factors;
  d.kind = "full-factorial";
  const std::size_t n = std::size_t{1} << k;
  d.rows.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<int> row(k);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = (r >> (k - 1 - j)) & 1 ? +1 : -1;
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

DesignMatrix plackett_burman(const std::vector<Factor>& factors) {
  const std::size_t k = factors.size();
  if (k < 1 || k > 11) {
    throw TooManyFactorsError(
        "the 12-run Plackett-Burman design supports 1..11 factors, got " +
        std::to_string(k));
  }
  check_factors(factors);
  // Standard 12-run generator row.
  static constexpr int generator[11] = {+1, +1, -1, +1, +1, +1,
                                        -1, -1, -1, +1, -1};
  DesignMatrix d;
  d.factors = factors;
  d.kind = "plackett-burman";
  for (std::size_t r = 0; r < 11; ++r) {
    std::vector<int> row(k);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = generator[(j + r) % 11];
    }
    d.rows.push_back(std::move(row));
  }
  d.rows.push_back(std::vector<int>(k, -1));
  return d;
}

DesignMatrix fractional_factorial(const std::vector<Factor>& factors, int p) {
  const std::size_t k = factors.size();
  if (k < 1 || k > 16) {
    throw TooManyFactorsError("fractional factorial supports 1..16 factors");
  }
  if (p < 0 || static_cast<std::size_t>(p) >= k) {
    throw InvalidFractionError("need 0 <= p < k for a 2^(k-p) design");
  }
  check_factors(factors);
  if (p == 0) {
    DesignMatrix d = full_factorial(factors);
    d.kind = "fractional(p=0)";
    return d;
  }
  const std::size_t base = k - static_cast<std::size_t>(p);

  // Generators: distinct subsets of the basis columns with >= 2 members,
  // largest cardinality first, then lexicographic on member indices.
  std::vector<std::vector<std::size_t>> subsets;
  for (std::size_t size = base; size >= 2; --size) {
    std::vector<bool> pick(base, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    // Lexicographic combinations via prev_permutation over the mask.
    std::vector<std::vector<std::size_t>> batch;
    do {
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < base; ++i) {
        if (pick[i]) subset.push_back(i);
      }
      batch.push_back(std::move(subset));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    std::sort(batch.begin(), batch.end());
    for (auto& s : batch) subsets.push_back(std::move(s));
    if (subsets.size() >= static_cast<std::size_t>(p)) break;
  }
  if (subsets.size() < static_cast<std::size_t>(p)) {
    throw InvalidFractionError("not enough generator subsets for p = " +
                               std::to_string(p));
  }

  DesignMatrix d;
  d.factors = factors;
  d.kind = "fractional(p=" + std::to_string(p) + ")";
  const std::size_t n = std::size_t{1} << base;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<int> row(k);
    for (std::size_t j = 0; j < base; ++j) {
      row[j] = (r >> (base - 1 - j)) & 1 ? +1 : -1;
    }
    for (std::size_t g = 0; g < static_cast<std::size_t>(p); ++g) {
      int prod = 1;
      for (std::size_t idx : subsets[g]) prod *= row[idx];
      row[base + g] = prod;
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

namespace {

// Applies one decoded factor setting to a working copy of the experiment.
void apply_setting(const Factor& f, std::int64_t value, Experiment& e,
                   const ExperimentTemplate& tmpl) {
  const Function& entry = e.program.entry_function();
  switch (f.source) {
    case FactorSource::ScalarValue: {
      auto it = e.spec.scalars.find(f.param);
      if (it == e.spec.scalars.end() || it->second.symbolic) {
        throw UnresolvableFactorError("factor '" + f.name +
                                      "' needs a concrete scalar parameter '" +
                                      f.param + "'");
      }
      it->second.value = value;
      break;
    }
    case FactorSource::DomainWidth: {
      auto it = e.spec.scalars.find(f.param);
      if (it == e.spec.scalars.end() || !it->second.symbolic) {
        throw UnresolvableFactorError("factor '" + f.name +
                                      "' needs a symbolic scalar parameter '" +
                                      f.param + "'");
      }
      if (value < 1) {
        throw UnresolvableFactorError("domain width for '" + f.param +
                                      "' must be >= 1");
      }
      // Width w decodes to the domain [0, w-1].
      it->second.lo = 0;
      it->second.hi = value - 1;
      break;
    }
    case FactorSource::ArraySize: {
      const Param* param = entry.find_param(f.param);
      auto it = e.spec.arrays.find(f.param);
      if (!param || !param->is_array() || it == e.spec.arrays.end() ||
          !it->second.symbolic) {
        throw UnresolvableFactorError("factor '" + f.name +
                                      "' needs a symbolic array parameter '" +
                                      f.param + "'");
      }
      if (value < 1) {
        throw UnresolvableFactorError("array size for '" + f.param +
                                      "' must be >= 1");
      }
      // Rebuild the signature with the new length.
      for (auto& fn : e.program.functions) {
        if (fn.name != e.program.entry) continue;
        for (auto& prm : fn.params) {
          if (prm.name == f.param) prm.array_length = value;
        }
      }
      break;
    }
    case FactorSource::LoopCap:
      if (value < 1) {
        throw UnresolvableFactorError("loop cap must be >= 1");
      }
      e.limits.max_loop_iterations = static_cast<std::uint64_t>(value);
      break;
    case FactorSource::StaticFeature: {
      if (value < 0 ||
          static_cast<std::size_t>(value) >= tmpl.variants.size()) {
        throw UnresolvableFactorError(
            "factor '" + f.name + "' selects program variant " +
            std::to_string(value) + " but only " +
            std::to_string(tmpl.variants.size()) + " variants were supplied");
      }
      e.program = tmpl.variants[static_cast<std::size_t>(value)];
      break;
    }
  }
}

}  // namespace

std::vector<Experiment> instantiate(const DesignMatrix& design,
                                    const ExperimentTemplate& tmpl) {
  std::size_t static_factors = 0;
  for (const auto& f : design.factors) {
    if (f.source == FactorSource::StaticFeature) ++static_factors;
  }
  if (static_factors > 1) {
    throw UnresolvableFactorError(
        "at most one static-feature factor is supported per design");
  }

  std::vector<Experiment> out;
  out.reserve(design.rows.size());
  for (std::size_t r = 0; r < design.rows.size(); ++r) {
    Experiment e;
    e.run_index = r;
    e.program = tmpl.program;
    e.spec = tmpl.base_spec;
    e.limits = tmpl.limits;
    // Static-feature factors swap the program first so later settings apply
    // to the selected variant's spec consistently.
    for (std::size_t j = 0; j < design.factors.size(); ++j) {
      const Factor& f = design.factors[j];
      std::int64_t value = design.rows[r][j] > 0 ? f.high : f.low;
      if (f.source == FactorSource::StaticFeature) {
        apply_setting(f, value, e, tmpl);
      }
    }
    for (std::size_t j = 0; j < design.factors.size(); ++j) {
      const Factor& f = design.factors[j];
      std::int64_t value = design.rows[r][j] > 0 ? f.high : f.low;
      if (f.source != FactorSource::StaticFeature) {
        apply_setting(f, value, e, tmpl);
      }
      e.settings.push_back({f.name, value});
    }
    e.spec.validate_against(e.program.entry_function());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::pair<std::string, double>> main_effects(
    const DesignMatrix& design, const std::vector<double>& responses) {
  if (responses.size() != design.rows.size()) {
    throw LengthMismatchError("expected " + std::to_string(design.rows.size()) +
                              " responses, got " +
                              std::to_string(responses.size()));
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < design.factors.size(); ++j) {
    double hi_sum = 0.0, lo_sum = 0.0;
    std::size_t hi_n = 0, lo_n = 0;
    for (std::size_t r = 0; r < design.rows.size(); ++r) {
      if (design.rows[r][j] > 0) {
        hi_sum += responses[r];
        ++hi_n;
      } else {
        lo_sum += responses[r];
        ++lo_n;
      }
    }
    double effect = hi_sum / static_cast<double>(hi_n) -
                    lo_sum / static_cast<double>(lo_n);
    out.push_back({design.factors[j].name, effect});
  }
  return out;
}

ScreenResult screen(const std::vector<std::pair<std::string, double>>& effects,
                    const ScreenPolicy& policy) {
  if (effects.empty()) throw ConfigError("screen needs at least one effect");
  ScreenResult result;

  bool all_zero = std::all_of(effects.begin(), effects.end(),
                              [](const auto& e) { return e.second == 0.0; });
  if (all_zero) {
    result.warning = "all main effects are exactly zero; nothing to select";
    return result;
  }

  if (policy.top_k) {
    // Stable ranking: by |effect| descending, ties by declaration order.
    std::vector<std::size_t> order(effects.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(effects[a].second) > std::abs(effects[b].second);
    });
    std::size_t take = std::min(*policy.top_k, effects.size());
    std::vector<bool> keep(effects.size(), false);
    for (std::size_t i = 0; i < take; ++i) keep[order[i]] = true;
    for (std::size_t i = 0; i < effects.size(); ++i) {
      if (keep[i]) result.selected.push_back(effects[i].first);
    }
    return result;
  }

  double tau = policy.threshold.value_or(0.0);
  for (const auto& [name, effect] : effects) {
    if (std::abs(effect) >= tau && effect != 0.0) {
      result.selected.push_back(name);
    }
  }
  if (result.selected.empty()) {
    // Guarantee at least one factor: take the largest absolute effect.
    std::size_t best = 0;
    for (std::size_t i = 1; i < effects.size(); ++i) {
      if (std::abs(effects[i].second) > std::abs(effects[best].second)) best = i;
    }
    result.selected.push_back(effects[best].first);
  }
  return result;
}

Observation observe(const Experiment& e, const CostReport& report) {
  Observation o;
  o.run_index = e.run_index;
  o.settings = e.settings;
  o.wall_time_ns = report.wall_time_ns;
  o.deterministic_cost = report.deterministic_cost;
  o.paths_completed = static_cast<std::int64_t>(report.stats.paths_completed);
  o.queries = static_cast<std::int64_t>(report.stats.queries);
  o.propagation_steps_total =
      static_cast<std::int64_t>(report.stats.propagation_steps_total);
  o.status = report.stats.paths_truncated > 0 ? "truncated" : "ok";
  return o;
}

CsvTable design_to_csv(const DesignMatrix& design) {
  CsvTable t;
  t.header.push_back("run_index");
  for (const auto& f : design.factors) t.header.push_back(f.name);
  for (std::size_t r = 0; r < design.rows.size(); ++r) {
    std::vector<std::string> row;
    row.push_back(std::to_string(r));
    for (int v : design.rows[r]) row.push_back(v > 0 ? "1" : "-1");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable observations_to_csv(const std::vector<std::string>& factor_names,
                             const std::vector<Observation>& observations,
                             bool include_wall_time) {
  CsvTable t;
  t.header.push_back("run_index");
  for (const auto& name : factor_names) t.header.push_back(name);
  if (include_wall_time) t.header.push_back("wall_time_ns");
  t.header.push_back("deterministic_cost");
  t.header.push_back("paths_completed");
  t.header.push_back("queries");
  t.header.push_back("propagation_steps_total");
  t.header.push_back("status");
  for (const auto& o : observations) {
    std::vector<std::string> row;
    row.push_back(std::to_string(o.run_index));
    for (const auto& name : factor_names) {
      auto it = std::find_if(o.settings.begin(), o.settings.end(),
                             [&](const auto& s) { return s.first == name; });
      if (it == o.settings.end()) {
        throw ConfigError("observation " + std::to_string(o.run_index) +
                          " lacks factor '" + name + "'");
      }
      row.push_back(format_number(it->second));
    }
    if (include_wall_time) row.push_back(format_number(o.wall_time_ns));
    row.push_back(format_number(o.deterministic_cost));
    row.push_back(format_number(o.paths_completed));
    row.push_back(format_number(o.queries));
    row.push_back(format_number(o.propagation_steps_total));
    row.push_back(o.status);
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<Observation> run_experiments(const std::vector<Experiment>& experiments,
                                         const CostWeights& weights, int jobs) {
  std::vector<Observation> out(experiments.size());
  if (jobs < 1) jobs = 1;
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= experiments.size()) return;
      const Experiment& e = experiments[i];
      Observation o;
      try {
        CostReport report = execute(e.program, e.spec, e.limits, weights);
        o = observe(e, report);
      } catch (const std::exception&) {
        o.run_index = e.run_index;
        o.settings = e.settings;
        o.status = "error";
      }
      out[i] = std::move(o);
    }
  };
  if (jobs == 1 || experiments.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    int n = std::min<int>(jobs, static_cast<int>(experiments.size()));
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // Canonical order: by run_index.
  std::sort(out.begin(), out.end(),
            [](const Observation& a, const Observation& b) {
              return a.run_index < b.run_index;
            });
  return out;
}

}  // namespace verimodel
