//===-- gp.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "verimodel/csv.hpp"
#include "verimodel/rng.hpp"

namespace verimodel {

GpNodeRef gp_constant(double v) {
  auto n = std::make_shared<GpNode>();
  n->op = GpOp::Constant;
  n->value = v;
  return n;
}

GpNodeRef gp_feature(std::size_t index) {
  auto n = std::make_shared<GpNode>();
  n->op = GpOp::Feature;
  n->feature = index;
  return n;
}

GpNodeRef gp_node(GpOp op, GpNodeRef left, GpNodeRef right) {
  auto n = std::make_shared<GpNode>();
  n->op = op;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

double eval_tree(const GpNode& node, const std::vector<double>& x) {
  switch (node.op) {
    case GpOp::Constant: return node.value;
    case GpOp::Feature: return x[node.feature];
    case GpOp::Add: return eval_tree(*node.left, x) + eval_tree(*node.right, x);
    case GpOp::Sub: return eval_tree(*node.left, x) - eval_tree(*node.right, x);
    case GpOp::Mul: return eval_tree(*node.left, x) * eval_tree(*node.right, x);
    case GpOp::Div: {
      double num = eval_tree(*node.left, x);
      double den = eval_tree(*node.right, x);
      // Protected division: 1 at (near-)zero denominators.
      if (std::abs(den) < 1e-9) return 1.0;
      return num / den;
    }
    case GpOp::Log1pAbs: return std::log1p(std::abs(eval_tree(*node.left, x)));
  }
  return 0.0;
}

std::size_t tree_size(const GpNode& node) {
  std::size_t n = 1;
  if (node.left) n += tree_size(*node.left);
  if (node.right) n += tree_size(*node.right);
  return n;
}

int tree_depth(const GpNode& node) {
  int d = 0;
  if (node.left) d = std::max(d, 1 + tree_depth(*node.left));
  if (node.right) d = std::max(d, 1 + tree_depth(*node.right));
  return d;
}

namespace {

const char* op_name(GpOp op) {
  switch (op) {
    case GpOp::Add: return "add";
    case GpOp::Sub: return "sub";
    case GpOp::Mul: return "mul";
    case GpOp::Div: return "div";
    case GpOp::Log1pAbs: return "log1p";
    default: return "?";
  }
}

}  // namespace

std::string to_prefix(const GpNode& node, const std::vector<std::string>& names) {
  switch (node.op) {
    case GpOp::Constant: return format_number(node.value);
    case GpOp::Feature: return names.at(node.feature);
    case GpOp::Log1pAbs:
      return std::string("(log1p ") + to_prefix(*node.left, names) + ")";
    default:
      return std::string("(") + op_name(node.op) + " " +
             to_prefix(*node.left, names) + " " + to_prefix(*node.right, names) +
             ")";
  }
}

namespace {

struct PrefixParser {
  std::istringstream in;
  const std::vector<std::string>& names;

  PrefixParser(const std::string& text, const std::vector<std::string>& n)
      : in(text), names(n) {}

  std::string token() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) return t;
      } else if (c == '(' || c == ')') {
        if (!t.empty()) {
          in.unget();
          return t;
        }
        return std::string(1, c);
      } else {
        t.push_back(c);
      }
    }
    return t;
  }

  GpNodeRef parse() {
    std::string t = token();
    if (t.empty()) throw ConfigError("unexpected end of expression");
    if (t == "(") {
      std::string op = token();
      GpNodeRef node;
      if (op == "log1p") {
        node = gp_node(GpOp::Log1pAbs, parse());
      } else {
        GpOp kind;
        if (op == "add") kind = GpOp::Add;
        else if (op == "sub") kind = GpOp::Sub;
        else if (op == "mul") kind = GpOp::Mul;
        else if (op == "div") kind = GpOp::Div;
        else throw ConfigError("unknown operator in expression: " + op);
        GpNodeRef l = parse();
        GpNodeRef r = parse();
        node = gp_node(kind, std::move(l), std::move(r));
      }
      std::string close = token();
      if (close != ")") throw ConfigError("expected ')' in expression");
      return node;
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == t) return gp_feature(i);
    }
    try {
      return gp_constant(std::stod(t));
    } catch (...) {
      throw ConfigError("unknown terminal in expression: " + t);
    }
  }
};

}  // namespace

GpNodeRef from_prefix(const std::string& text,
                      const std::vector<std::string>& names) {
  PrefixParser parser(text, names);
  GpNodeRef root = parser.parse();
  std::string rest = parser.token();
  if (!rest.empty()) throw ConfigError("trailing tokens in expression: " + rest);
  return root;
}

double mse_of(const GpNode& tree, const Dataset& data) {
  double acc = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    double e = eval_tree(tree, data.features[r]) - data.response[r];
    acc += e * e;
  }
  double mse = acc / static_cast<double>(data.size());
  if (!std::isfinite(mse)) return std::numeric_limits<double>::infinity();
  return mse;
}

namespace {

class Evolver {
 public:
  Evolver(const Dataset& data, const GPConfig& config)
      : data_(data), config_(config), rng_(config.seed) {}

  ExprModel run() {
    std::vector<GpNodeRef> pop = initial_population();
    std::vector<double> fitness(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fitness[i] = fit(*pop[i]);

    std::vector<double> history;
    history.push_back(fitness[best_index(fitness)]);

    for (std::size_t gen = 0; gen < config_.generations; ++gen) {
      std::vector<GpNodeRef> next;
      next.reserve(pop.size());
      // Elitism: the incumbent best survives unchanged.
      std::size_t best = best_index(fitness);
      next.push_back(pop[best]);
      while (next.size() < pop.size()) {
        GpNodeRef child;
        if (rng_.chance(config_.crossover_prob)) {
          const GpNodeRef& p1 = pop[tournament(fitness)];
          const GpNodeRef& p2 = pop[tournament(fitness)];
          child = crossover(p1, p2);
        } else {
          child = pop[tournament(fitness)];
        }
        if (rng_.chance(config_.mutation_prob)) {
          child = mutate(child);
        }
        next.push_back(std::move(child));
      }
      pop = std::move(next);
      for (std::size_t i = 0; i < pop.size(); ++i) fitness[i] = fit(*pop[i]);
      history.push_back(fitness[best_index(fitness)]);
    }

    std::size_t best = best_index(fitness);
    GpNodeRef tuned = tune_constants(pop[best]);

    ExprModel model;
    model.root = tuned;
    model.feature_names = data_.feature_names;
    model.response_name = data_.response_name;
    model.training_mse = mse_of(*tuned, data_);
    model.node_count = tree_size(*tuned);
    model.seed = config_.seed;
    model.generations_run = config_.generations;
    model.best_fitness_history = std::move(history);
    model.training = data_;
    return model;
  }

 private:
  double fit(const GpNode& tree) {
    double f = mse_of(tree, data_) +
               config_.parsimony * static_cast<double>(tree_size(tree));
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    return f;
  }

  static std::size_t best_index(const std::vector<double>& fitness) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < fitness.size(); ++i) {
      if (fitness[i] < fitness[best]) best = i;
    }
    return best;
  }

  std::size_t tournament(const std::vector<double>& fitness) {
    std::size_t best = rng_.index(fitness.size());
    for (std::size_t k = 1; k < config_.tournament; ++k) {
      std::size_t i = rng_.index(fitness.size());
      if (fitness[i] < fitness[best]) best = i;
    }
    return best;
  }

  GpNodeRef random_terminal() {
    if (!data_.feature_names.empty() && !rng_.chance(0.3)) {
      return gp_feature(rng_.index(data_.feature_names.size()));
    }
    // Ephemeral constants in [-5, 5].
    return gp_constant(rng_.uniform() * 10.0 - 5.0);
  }

  GpNodeRef random_tree(int depth, bool full) {
    if (depth <= 0 || (!full && rng_.chance(0.25))) {
      return random_terminal();
    }
    switch (rng_.index(5)) {
      case 0: return gp_node(GpOp::Add, random_tree(depth - 1, full),
                             random_tree(depth - 1, full));
      case 1: return gp_node(GpOp::Sub, random_tree(depth - 1, full),
                             random_tree(depth - 1, full));
      case 2: return gp_node(GpOp::Mul, random_tree(depth - 1, full),
                             random_tree(depth - 1, full));
      case 3: return gp_node(GpOp::Div, random_tree(depth - 1, full),
                             random_tree(depth - 1, full));
      default: return gp_node(GpOp::Log1pAbs, random_tree(depth - 1, full));
    }
  }

  std::vector<GpNodeRef> initial_population() {
    // Ramped half and half over depths 1..3.
    std::vector<GpNodeRef> pop;
    pop.reserve(config_.population);
    for (std::size_t i = 0; i < config_.population; ++i) {
      int depth = 1 + static_cast<int>(i % 3);
      bool full = (i / 3) % 2 == 0;
      pop.push_back(random_tree(depth, full));
    }
    return pop;
  }

  // Replaces the node with preorder index `target` in `tree`.
  GpNodeRef replace_at(const GpNodeRef& tree, std::size_t& counter,
                       std::size_t target, const GpNodeRef& replacement) {
    if (counter == target) {
      ++counter;
      return replacement;
    }
    ++counter;
    if (tree->op == GpOp::Constant || tree->op == GpOp::Feature) return tree;
    GpNodeRef left = tree->left;
    GpNodeRef right = tree->right;
    if (left) left = replace_at(left, counter, target, replacement);
    if (right && counter <= target) {
      right = replace_at(right, counter, target, replacement);
    }
    if (left == tree->left && right == tree->right) return tree;
    auto n = std::make_shared<GpNode>(*tree);
    n->left = std::move(left);
    n->right = std::move(right);
    return n;
  }

  const GpNode* subtree_at(const GpNode& tree, std::size_t& counter,
                           std::size_t target) {
    if (counter == target) return &tree;
    ++counter;
    if (tree.left) {
      std::size_t saved = counter;
      const GpNode* hit = subtree_at(*tree.left, counter, target);
      if (hit) return hit;
      (void)saved;
    }
    if (tree.right) return subtree_at(*tree.right, counter, target);
    return nullptr;
  }

  GpNodeRef crossover(const GpNodeRef& a, const GpNodeRef& b) {
    std::size_t point_a = rng_.index(tree_size(*a));
    std::size_t point_b = rng_.index(tree_size(*b));
    std::size_t counter = 0;
    const GpNode* donor = subtree_at(*b, counter, point_b);
    auto replacement = std::make_shared<GpNode>(*donor);
    counter = 0;
    GpNodeRef child = replace_at(a, counter, point_a, replacement);
    // Depth discipline: an oversized child is discarded for its parent.
    if (tree_depth(*child) > config_.max_depth) return a;
    return child;
  }

  GpNodeRef mutate(const GpNodeRef& tree) {
    std::size_t point = rng_.index(tree_size(*tree));
    GpNodeRef replacement = random_tree(2, false);
    std::size_t counter = 0;
    GpNodeRef child = replace_at(tree, counter, point, replacement);
    if (tree_depth(*child) > config_.max_depth) return tree;
    return child;
  }

  // Coordinate descent over the constants of the final tree: 100 rounds of
  // shrinking +/- steps, keeping any improvement.
  GpNodeRef tune_constants(GpNodeRef tree) {
    std::size_t n = tree_size(*tree);
    std::vector<std::size_t> constant_indices;
    std::size_t idx = 0;
    collect_constants(*tree, idx, constant_indices);
    if (constant_indices.empty()) return tree;

    double best_fit = fit(*tree);
    for (int round = 0; round < 100; ++round) {
      double delta = std::pow(0.8, round);
      for (std::size_t ci : constant_indices) {
        for (double dir : {+1.0, -1.0}) {
          GpNodeRef candidate = adjust_constant(tree, ci, dir * delta);
          double f = fit(*candidate);
          if (f < best_fit) {
            best_fit = f;
            tree = candidate;
          }
        }
      }
    }
    (void)n;
    return tree;
  }

  void collect_constants(const GpNode& node, std::size_t& idx,
                         std::vector<std::size_t>& out) {
    if (node.op == GpOp::Constant) out.push_back(idx);
    ++idx;
    if (node.left) collect_constants(*node.left, idx, out);
    if (node.right) collect_constants(*node.right, idx, out);
  }

  GpNodeRef adjust_constant(const GpNodeRef& tree, std::size_t target,
                            double delta) {
    std::size_t counter = 0;
    const GpNode* node = subtree_at(*tree, counter, target);
    auto updated = std::make_shared<GpNode>(*node);
    updated->value += delta;
    counter = 0;
    return replace_at(tree, counter, target, updated);
  }

  const Dataset& data_;
  GPConfig config_;
  Rng rng_;
};

}  // namespace

ExprModel symbolic_regression(const Dataset& data, const GPConfig& config) {
  if (data.size() == 0) throw FittingError("EmptyDataset: nothing to fit");
  return Evolver(data, config).run();
}

double predict(const ExprModel& model, const std::vector<double>& x) {
  if (x.size() != model.feature_names.size()) {
    throw FittingError("ArityMismatch: model has " +
                       std::to_string(model.feature_names.size()) +
                       " features, point has " + std::to_string(x.size()));
  }
  return eval_tree(*model.root, x);
}

}  // namespace verimodel
