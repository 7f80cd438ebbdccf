//===-- assess.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/assess.hpp"

#include <cmath>
#include <limits>

#include "verimodel/rng.hpp"

namespace verimodel {

double predict_model(const Model& model, const std::vector<double>& x) {
  return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

const std::vector<std::string>& model_feature_names(const Model& model) {
  return std::visit(
      [](const auto& m) -> const std::vector<std::string>& {
        return m.feature_names;
      },
      model);
}

const Dataset& model_training_data(const Model& model) {
  return std::visit([](const auto& m) -> const Dataset& { return m.training; },
                    model);
}

SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw FittingError("test_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = data.size();
  auto n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * test_fraction));
  if (n_test == 0) n_test = 1;
  if (n_test >= n) {
    throw FittingError("TooFewRows: cannot split " + std::to_string(n) +
                       " rows into nonempty train and test parts");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SplitResult result;
  result.seed = seed;
  result.train.feature_names = data.feature_names;
  result.train.response_name = data.response_name;
  result.test.feature_names = data.feature_names;
  result.test.response_name = data.response_name;
  for (std::size_t i = 0; i < n; ++i) {
    Dataset& part = i < n - n_test ? result.train : result.test;
    auto& indices =
        i < n - n_test ? result.train_indices : result.test_indices;
    part.features.push_back(data.features[order[i]]);
    part.response.push_back(data.response[order[i]]);
    if (!data.row_ids.empty()) part.row_ids.push_back(data.row_ids[order[i]]);
    indices.push_back(order[i]);
  }
  return result;
}

AssessmentReport assess(const Model& model, const Dataset& test, double alpha) {
  if (test.size() == 0) throw FittingError("assessment needs a nonempty test set");

  // The guard on reusing fitting experiments for assessment. Rows are the
  // same experiment when their values match and, where both sides carry
  // run indices, the indices match too (distinct experiments can land on
  // identical values under a deterministic response).
  const Dataset& train = model_training_data(model);
  bool ids = !train.row_ids.empty() && !test.row_ids.empty();
  for (std::size_t t = 0; t < test.size(); ++t) {
    for (std::size_t r = 0; r < train.size(); ++r) {
      if (train.features[r] != test.features[t] ||
          train.response[r] != test.response[t]) {
        continue;
      }
      if (ids && train.row_ids[r] != test.row_ids[t]) continue;
      throw FittingError(
          "TrainTestOverlap: test row " + std::to_string(t) +
          " is identical to a training row; assessment must use "
          "experiments different from the ones used to fit");
    }
  }

  AssessmentReport report;
  report.interval_alpha = alpha;
  const double eps = 1.0;  // one response unit, guards near-zero responses
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double mean = 0.0;
  for (double y : test.response) mean += y;
  mean /= static_cast<double>(test.size());
  double ss_tot = 0.0;

  const auto* linear = std::get_if<LinearModel>(&model);
  std::size_t covered = 0;

  for (std::size_t t = 0; t < test.size(); ++t) {
    double yhat = predict_model(model, test.features[t]);
    double y = test.response[t];
    double res = y - yhat;
    report.residuals.push_back(res);
    abs_sum += std::abs(res) / std::max(std::abs(y), eps);
    sq_sum += res * res;
    ss_tot += (y - mean) * (y - mean);
    if (linear) {
      auto [lo, hi] = prediction_interval(*linear, test.features[t], alpha);
      if (y >= lo && y <= hi) ++covered;
    }
  }
  report.mape = abs_sum / static_cast<double>(test.size());
  report.rmse = std::sqrt(sq_sum / static_cast<double>(test.size()));
  if (ss_tot == 0.0) {
    report.r_squared_test =
        sq_sum == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  } else {
    report.r_squared_test = 1.0 - sq_sum / ss_tot;
  }
  if (linear) {
    report.interval_coverage =
        static_cast<double>(covered) / static_cast<double>(test.size());
  }
  return report;
}

}  // namespace verimodel
