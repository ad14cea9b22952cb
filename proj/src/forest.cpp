#include "facelm/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "facelm/rng.hpp"

namespace facelm::forest {

namespace {

// Impurity improvements smaller than this are treated as ties so that the
// tie-break order (feature, then threshold) is not decided by rounding.
constexpr double kTieTolerance = 1e-12;

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const int> y, const TreeParams& params,
              std::size_t features_per_split, Rng* rng)
      : X_(X), y_(y), params_(params), features_per_split_(features_per_split), rng_(rng) {
    all_features_.resize(X.cols());
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build(std::vector<std::size_t> indices) {
    grow(std::move(indices), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  int grow(std::vector<std::size_t> indices, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    ClassCounts counts{};
    for (auto i : indices) counts[static_cast<std::size_t>(y_[i])]++;
    nodes_[id].counts = counts;

    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    const bool depth_cap = params_.max_depth && depth >= *params_.max_depth;
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (pure || depth_cap || indices.size() < 2 * min_leaf) return id;

    const Split split = best_split(indices);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : indices) {
      (X_(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& indices) {
    if (features_per_split_ >= X_.cols() || rng_ == nullptr) {
      Split best;
      for (std::size_t f = 0; f < X_.cols(); ++f) scan_feature(indices, f, best);
      return best;
    }
    // Draw a random feature order; evaluate the first features_per_split in
    // ascending index order and keep drawing only if none of them can split.
    std::vector<std::size_t> order = all_features_;
    rng_->shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> first(order.begin(),
                                   order.begin() + static_cast<std::ptrdiff_t>(features_per_split_));
    std::sort(first.begin(), first.end());
    Split best;
    for (auto f : first) scan_feature(indices, f, best);
    for (std::size_t k = features_per_split_; k < order.size() && best.feature < 0; ++k) {
      scan_feature(indices, order[k], best);
    }
    return best;
  }

  void scan_feature(const std::vector<std::size_t>& indices, std::size_t f, Split& best) {
    const std::size_t m = indices.size();
    sorted_.resize(m);
    for (std::size_t k = 0; k < m; ++k) sorted_[k] = {X_(indices[k], f), y_[indices[k]]};
    std::sort(sorted_.begin(), sorted_.end());

    ClassCounts total{};
    for (const auto& [v, c] : sorted_) total[static_cast<std::size_t>(c)]++;
    ClassCounts left{};
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      left[static_cast<std::size_t>(sorted_[k].second)]++;
      const double a = sorted_[k].first;
      const double b = sorted_[k + 1].first;
      if (!(a < b)) continue;
      const std::size_t nl = k + 1;
      const std::size_t nr = m - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      ClassCounts right{};
      for (std::size_t c = 0; c < kNumEmotions; ++c) right[c] = total[c] - left[c];
      const double score = (static_cast<double>(nl) * impurity(left, params_.criterion) +
                            static_cast<double>(nr) * impurity(right, params_.criterion)) /
                           static_cast<double>(m);
      // Features and thresholds are visited in ascending order, so a strict
      // improvement keeps the earliest candidate on ties.
      if (score < best.score - kTieTolerance) {
        double t = a + (b - a) / 2.0;
        if (!(t < b)) t = a;
        best = {static_cast<int>(f), t, score};
      }
    }
  }

  const Matrix& X_;
  std::span<const int> y_;
  const TreeParams& params_;
  std::size_t features_per_split_;
  Rng* rng_;
  std::vector<std::size_t> all_features_;
  std::vector<std::pair<double, int>> sorted_;
  std::vector<TreeNode> nodes_;
};

void check_inputs(const Matrix& X, std::span<const int> y) {
  if (X.rows() == 0) throw Error("cannot fit on an empty training set");
  if (X.rows() != y.size()) throw Error("feature/label count mismatch");
  for (int label : y) {
    if (label < 0 || label >= static_cast<int>(kNumEmotions)) throw Error("label out of range");
  }
}

}  // namespace

std::string_view criterion_name(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

Criterion parse_criterion(std::string_view text) {
  if (text == "gini") return Criterion::Gini;
  if (text == "entropy") return Criterion::Entropy;
  throw Error("unknown split criterion '" + std::string(text) + "'");
}

double impurity(const ClassCounts& counts, Criterion criterion) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw Error("impurity of an empty node");
  const auto n = static_cast<double>(total);
  double acc = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    acc += criterion == Criterion::Gini ? p * p : -p * std::log2(p);
  }
  return criterion == Criterion::Gini ? 1.0 - acc : acc;
}

int argmax_label(const ClassCounts& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Prediction DecisionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw Error("predict on an unfitted tree");
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    node = &nodes_[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  Prediction p;
  p.label = argmax_label(node->counts);
  const auto total = static_cast<double>(
      std::accumulate(node->counts.begin(), node->counts.end(), std::size_t{0}));
  for (std::size_t c = 0; c < kNumEmotions; ++c) {
    p.probabilities[c] = static_cast<double>(node->counts[c]) / total;
  }
  return p;
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  // Children are always stored after their parent.
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

DecisionTree fit_tree(const Matrix& X, std::span<const int> y, const TreeParams& params) {
  check_inputs(X, y);
  if (params.min_samples_leaf < 1) throw Error("min_samples_leaf must be >= 1");
  std::vector<std::size_t> indices(X.rows());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  TreeBuilder builder(X, y, params, X.cols(), nullptr);
  return DecisionTree(builder.build(std::move(indices)), X.cols());
}

RandomForest fit_forest(const Matrix& X, std::span<const int> y, const ForestParams& params) {
  check_inputs(X, y);
  if (params.n_trees < 1) throw Error("n_trees must be >= 1");
  if (params.features_per_split < 1 || params.features_per_split > static_cast<int>(X.cols())) {
    throw Error("features_per_split must be in [1, " + std::to_string(X.cols()) + "]");
  }
  if (params.tree.min_samples_leaf < 1) throw Error("min_samples_leaf must be >= 1");

  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  const std::size_t n = X.rows();
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.rng_seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> indices(n);
    if (params.bootstrap) {
      for (auto& i : indices) i = rng.index(n);
    } else {
      std::iota(indices.begin(), indices.end(), std::size_t{0});
    }
    TreeBuilder builder(X, y, params.tree, static_cast<std::size_t>(params.features_per_split),
                        &rng);
    trees.emplace_back(builder.build(std::move(indices)), X.cols());
  }
  return RandomForest(std::move(trees), params);
}

int RandomForest::predict(std::span<const double> x) const {
  if (trees_.empty()) throw Error("predict on an unfitted forest");
  ClassCounts votes{};
  for (const auto& t : trees_) votes[static_cast<std::size_t>(t.predict(x).label)]++;
  return argmax_label(votes);
}

nlohmann::json to_json(const DecisionTree& tree) {
  const auto& nodes = tree.nodes();
  auto node_json = [&](auto&& self, int id) -> nlohmann::json {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    nlohmann::json j = {{"class_counts", n.counts}};
    if (!n.is_leaf()) {
      j["feature_index"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = self(self, n.left);
      j["right"] = self(self, n.right);
    }
    return j;
  };
  return {{"n_features", tree.n_features()},
          {"root", nodes.empty() ? nlohmann::json() : node_json(node_json, 0)}};
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  auto read = [&](auto&& self, const nlohmann::json& nj) -> int {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].counts = nj.at("class_counts").get<ClassCounts>();
    if (nj.contains("feature_index")) {
      const int l = self(self, nj.at("left"));
      const int r = self(self, nj.at("right"));
      auto& n = nodes[static_cast<std::size_t>(id)];
      n.feature = nj.at("feature_index").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.left = l;
      n.right = r;
    }
    return id;
  };
  read(read, j.at("root"));
  return DecisionTree(std::move(nodes), j.at("n_features").get<std::size_t>());
}

nlohmann::json to_json(const TreeParams& p) {
  return {{"criterion", criterion_name(p.criterion)},
          {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json()},
          {"min_samples_leaf", p.min_samples_leaf},
          {"rng_seed", p.rng_seed}};
}

nlohmann::json to_json(const RandomForest& forest) {
  const auto& p = forest.params();
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : forest.trees()) trees.push_back(to_json(t));
  return {{"params",
           {{"n_trees", p.n_trees},
            {"tree", to_json(p.tree)},
            {"features_per_split", p.features_per_split},
            {"bootstrap", p.bootstrap},
            {"rng_seed", p.rng_seed}}},
          {"trees", trees}};
}

}  // namespace facelm::forest
