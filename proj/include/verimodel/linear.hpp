//===-- linear.hpp - Least-squares macro-models ------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "verimodel/csv.hpp"
#include "verimodel/errors.hpp"
#include "verimodel/linalg.hpp"

namespace verimodel {

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;  // rows x features
  std::vector<double> response;
  std::string response_name;
  // Experiment identity per row (run_index), when known. Two rows with the
  // same values are still different experiments if their ids differ.
  std::vector<std::int64_t> row_ids;

  std::size_t size() const { return response.size(); }
  std::size_t arity() const { return feature_names.size(); }
};

// Builds a dataset from a CSV table: `feature_columns` name the inputs and
// `response_column` the output. Rows whose status column reads "error" are
// rejected.
Dataset dataset_from_csv(const CsvTable& table,
                         const std::vector<std::string>& feature_columns,
                         const std::string& response_column);

// Optional response transform before fitting: y -> log(1+y), renaming the
// response to "log1p(<name>)". Verification cost is multiplicative in path
// count, so models are often additive on this scale.
Dataset log1p_response(const Dataset& data);

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<std::string> feature_names;
  std::size_t n = 0;          // training rows
  double residual_std = 0.0;  // sqrt(SSR / (n - p - 1))
  double r_squared = 0.0;
  Matrix xtx_inverse;  // (p+1)^2 over the intercept-augmented design
  Dataset training;    // retained for interval math and overlap checks
  std::uint64_t seed = 0;  // pipeline seed, recorded in the model file
};

// Ordinary least squares through a Householder QR of the intercept-augmented
// design matrix. Throws RankDeficientError naming the collinear columns and
// FittingError when rows <= features + 1.
LinearModel fit_linear(const Dataset& data);

double predict(const LinearModel& model, const std::vector<double>& x);

// Two-sided prediction interval for a new observation at x:
//   yhat +/- t(1 - alpha/2, n - p - 1) * s * sqrt(1 + x' (X'X)^{-1} x).
std::pair<double, double> prediction_interval(const LinearModel& model,
                                              const std::vector<double>& x,
                                              double alpha);

// Student-t quantile at probability p with df degrees of freedom: Acklam's
// rational approximation for the normal quantile, expanded to a t start
// value (Cornish-Fisher in 1/df), then polished by Newton steps on the CDF
// computed through the regularized incomplete beta continued fraction.
// Validated against frozen reference values to well below 1e-4 for df >= 3.
double student_t_quantile(double p, double df);

double student_t_cdf(double t, double df);

}  // namespace verimodel
