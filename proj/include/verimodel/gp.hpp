//===-- gp.hpp - Symbolic regression by genetic programming ------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Expression trees over {+, -, *, protected /, log1p|x|} with feature and
// constant terminals, evolved by tournament selection, subtree crossover
// and subtree mutation with single-individual elitism. Fitness is
// MSE + parsimony * node_count; evaluation is total (the protected division
// returns 1 at a zero denominator) and every run is a pure function of the
// seed.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "verimodel/linear.hpp"

namespace verimodel {

enum class GpOp { Add, Sub, Mul, Div, Log1pAbs, Feature, Constant };

struct GpNode;
using GpNodeRef = std::shared_ptr<const GpNode>;

struct GpNode {
  GpOp op = GpOp::Constant;
  std::size_t feature = 0;  // Feature
  double value = 0.0;       // Constant
  GpNodeRef left;           // binary ops and Log1pAbs
  GpNodeRef right;          // binary ops
};

GpNodeRef gp_constant(double v);
GpNodeRef gp_feature(std::size_t index);
GpNodeRef gp_node(GpOp op, GpNodeRef left, GpNodeRef right = nullptr);

double eval_tree(const GpNode& node, const std::vector<double>& x);
std::size_t tree_size(const GpNode& node);
int tree_depth(const GpNode& node);

// Prefix form, e.g. "(add width_n (mul 2.0 cap))"; features print by name.
std::string to_prefix(const GpNode& node, const std::vector<std::string>& names);
GpNodeRef from_prefix(const std::string& text,
                      const std::vector<std::string>& names);

struct GPConfig {
  std::size_t population = 500;
  std::size_t generations = 100;
  std::size_t tournament = 5;
  double crossover_prob = 0.9;
  double mutation_prob = 0.1;
  int max_depth = 8;
  double parsimony = 1e-3;
  std::uint64_t seed = 0;
};

struct ExprModel {
  GpNodeRef root;
  std::vector<std::string> feature_names;
  std::string response_name;
  double training_mse = 0.0;
  std::size_t node_count = 0;
  std::uint64_t seed = 0;
  std::size_t generations_run = 0;
  // Best fitness after every generation (index 0 = initial population);
  // elitism makes this sequence non-increasing.
  std::vector<double> best_fitness_history;
  Dataset training;
};

double mse_of(const GpNode& tree, const Dataset& data);

ExprModel symbolic_regression(const Dataset& data, const GPConfig& config);

double predict(const ExprModel& model, const std::vector<double>& x);

}  // namespace verimodel
