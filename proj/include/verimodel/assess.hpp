//===-- assess.hpp - Held-out accuracy assessment ----------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "verimodel/gp.hpp"
#include "verimodel/linear.hpp"

namespace verimodel {

using Model = std::variant<LinearModel, ExprModel>;

double predict_model(const Model& model, const std::vector<double>& x);
const std::vector<std::string>& model_feature_names(const Model& model);
const Dataset& model_training_data(const Model& model);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
};

// Seeded uniform shuffle, then a prefix/suffix cut with
// n_test = max(1, floor(n * test_fraction)); both parts end nonempty.
SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed);

struct AssessmentReport {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t split_seed = 0;
  double mape = 0.0;  // mean(|y - yhat| / max(|y|, 1))
  double rmse = 0.0;
  double r_squared_test = 0.0;
  double interval_alpha = 0.0;
  // Fraction of test points inside their prediction interval; linear
  // models only.
  std::optional<double> interval_coverage;
  std::vector<double> residuals;  // y - yhat per test point
};

// Evaluates the model on held-out rows. Rejects any test row that is
// identical (features and response) to a training row.
AssessmentReport assess(const Model& model, const Dataset& test, double alpha);

}  // namespace verimodel
