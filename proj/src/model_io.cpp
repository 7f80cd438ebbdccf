//===-- model_io.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "verimodel/csv.hpp"

namespace verimodel {

namespace {

using Json = nlohmann::ordered_json;

Json dataset_to_json(const Dataset& d) {
  Json j;
  j["feature_names"] = d.feature_names;
  j["response_name"] = d.response_name;
  j["features"] = d.features;
  j["response"] = d.response;
  if (!d.row_ids.empty()) j["row_ids"] = d.row_ids;
  return j;
}

Dataset dataset_from_json(const Json& j) {
  Dataset d;
  d.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  d.response_name = j.at("response_name").get<std::string>();
  d.features = j.at("features").get<std::vector<std::vector<double>>>();
  d.response = j.at("response").get<std::vector<double>>();
  d.row_ids = j.value("row_ids", std::vector<std::int64_t>{});
  return d;
}

}  // namespace

std::string model_to_json_text(const Model& model) {
  Json j;
  j["format_version"] = 1;
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    j["kind"] = "linear";
    j["feature_names"] = linear->feature_names;
    j["intercept"] = linear->intercept;
    j["coefficients"] = linear->coefficients;
    j["n"] = linear->n;
    j["residual_std"] = linear->residual_std;
    j["r_squared"] = linear->r_squared;
    Json xtx = Json::array();
    for (std::size_t r = 0; r < linear->xtx_inverse.rows; ++r) {
      Json row = Json::array();
      for (std::size_t c = 0; c < linear->xtx_inverse.cols; ++c) {
        row.push_back(linear->xtx_inverse.at(r, c));
      }
      xtx.push_back(std::move(row));
    }
    j["xtx_inverse"] = std::move(xtx);
    j["seed"] = linear->seed;
    j["training"] = dataset_to_json(linear->training);
  } else {
    const auto& expr = std::get<ExprModel>(model);
    j["kind"] = "expression";
    j["feature_names"] = expr.feature_names;
    j["expression"] = to_prefix(*expr.root, expr.feature_names);
    j["training_mse"] = expr.training_mse;
    j["node_count"] = expr.node_count;
    j["seed"] = expr.seed;
    j["generations_run"] = expr.generations_run;
    j["best_fitness_history"] = expr.best_fitness_history;
    j["training"] = dataset_to_json(expr.training);
  }
  return j.dump(2) + "\n";
}

Model model_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw ConfigError("unsupported model format version");
    }
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      LinearModel m;
      m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
      m.intercept = j.at("intercept").get<double>();
      m.coefficients = j.at("coefficients").get<std::vector<double>>();
      m.n = j.at("n").get<std::size_t>();
      m.residual_std = j.at("residual_std").get<double>();
      m.r_squared = j.at("r_squared").get<double>();
      auto xtx = j.at("xtx_inverse").get<std::vector<std::vector<double>>>();
      m.xtx_inverse = Matrix(xtx.size(), xtx.empty() ? 0 : xtx[0].size());
      for (std::size_t r = 0; r < xtx.size(); ++r) {
        for (std::size_t c = 0; c < xtx[r].size(); ++c) {
          m.xtx_inverse.at(r, c) = xtx[r][c];
        }
      }
      m.seed = j.value("seed", std::uint64_t{0});
      m.training = dataset_from_json(j.at("training"));
      return m;
    }
    if (kind == "expression") {
      ExprModel m;
      m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
      m.root = from_prefix(j.at("expression").get<std::string>(), m.feature_names);
      m.training_mse = j.at("training_mse").get<double>();
      m.node_count = j.at("node_count").get<std::size_t>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.generations_run = j.at("generations_run").get<std::size_t>();
      m.best_fitness_history =
          j.value("best_fitness_history", std::vector<double>{});
      m.training = dataset_from_json(j.at("training"));
      m.response_name = m.training.response_name;
      return m;
    }
    throw ConfigError("unknown model kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::string& path, const Model& model) {
  write_text_atomic(path, model_to_json_text(model));
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json_text(text);
}

}  // namespace verimodel
