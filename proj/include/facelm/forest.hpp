#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "facelm/emotion.hpp"
#include "facelm/matrix.hpp"
#include "json.hpp"

namespace facelm::forest {

using ClassCounts = std::array<std::size_t, kNumEmotions>;

enum class Criterion { Gini, Entropy };

std::string_view criterion_name(Criterion c);
Criterion parse_criterion(std::string_view text);

/// gini = 1 - sum p^2, entropy = -sum p log2 p. Throws on an empty node.
double impurity(const ClassCounts& counts, Criterion criterion);

struct TreeParams {
  Criterion criterion = Criterion::Gini;
  std::optional<int> max_depth;  // unlimited when empty
  int min_samples_leaf = 1;
  std::uint64_t rng_seed = 0;
};

/// Flat node storage; children are indices into DecisionTree::nodes.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  ClassCounts counts{};

  bool is_leaf() const { return feature < 0; }
};

struct Prediction {
  int label = 0;
  std::array<double, kNumEmotions> probabilities{};
};

/// Label with the highest count; ties go to the lowest label index.
int argmax_label(const ClassCounts& counts);

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features)
      : nodes_(std::move(nodes)), n_features_(n_features) {}

  /// x[feature] <= threshold descends left.
  Prediction predict(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t n_features() const { return n_features_; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

/// Greedy exact CART. At each node every candidate feature is scanned over
/// midpoints between consecutive distinct values; the lowest weighted child
/// impurity wins, ties going to the lower feature index, then the lower
/// threshold. Stops at purity, max_depth, or when no split keeps
/// min_samples_leaf on both sides.
DecisionTree fit_tree(const Matrix& X, std::span<const int> y, const TreeParams& params);

struct ForestParams {
  int n_trees = 100;
  TreeParams tree;
  int features_per_split = 11;  // floor(sqrt(136))
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;
};

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::vector<DecisionTree> trees, ForestParams params)
      : trees_(std::move(trees)), params_(params) {}

  /// Majority vote; ties go to the lowest label index.
  int predict(std::span<const double> x) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const ForestParams& params() const { return params_; }

 private:
  std::vector<DecisionTree> trees_;
  ForestParams params_;
};

/// Each tree sees a seeded bootstrap resample of size n (when enabled) and
/// features_per_split random candidate features per node.
RandomForest fit_forest(const Matrix& X, std::span<const int> y, const ForestParams& params);

nlohmann::json to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TreeParams& params);
nlohmann::json to_json(const RandomForest& forest);

}  // namespace facelm::forest
