#include <cmath>
#include <numeric>

#include "doctest.h"
#include "facelm/evaluate.hpp"
#include "facelm/forest.hpp"
#include "facelm/synth.hpp"
#include "test_support.hpp"

using namespace facelm;
using namespace facelm::forest;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix X(values.size(), 1);
  std::size_t i = 0;
  for (double v : values) X(i++, 0) = v;
  return X;
}

double train_accuracy(const DecisionTree& tree, const Matrix& X, const std::vector<int>& y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < X.rows(); ++i) hits += tree.predict(X.row(i)).label == y[i];
  return static_cast<double>(hits) / static_cast<double>(X.rows());
}

}  // namespace

TEST_CASE("impurity of pure, balanced and uniform nodes") {
  CHECK(impurity({8, 0, 0, 0, 0, 0, 0}, Criterion::Gini) == 0.0);
  CHECK(impurity({8, 0, 0, 0, 0, 0, 0}, Criterion::Entropy) == 0.0);
  CHECK(impurity({4, 4, 0, 0, 0, 0, 0}, Criterion::Gini) == doctest::Approx(0.5));
  CHECK(impurity({4, 4, 0, 0, 0, 0, 0}, Criterion::Entropy) == doctest::Approx(1.0));
  CHECK(impurity({1, 1, 1, 1, 1, 1, 1}, Criterion::Gini) == doctest::Approx(6.0 / 7.0));
  CHECK(impurity({1, 1, 1, 1, 1, 1, 1}, Criterion::Entropy) == doctest::Approx(std::log2(7.0)));
  CHECK_THROWS_AS(impurity({}, Criterion::Gini), Error);
}

TEST_CASE("impurity stays within its bounds") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    ClassCounts c{};
    for (auto& v : c) v = rng.index(5);
    if (std::accumulate(c.begin(), c.end(), std::size_t{0}) == 0) c[0] = 1;
    const double g = impurity(c, Criterion::Gini);
    const double e = impurity(c, Criterion::Entropy);
    CHECK((g >= 0.0 && g <= 6.0 / 7.0 + 1e-12));
    CHECK((e >= -1e-12 && e <= std::log2(7.0) + 1e-12));
  }
}

TEST_CASE("one split separates one-dimensional data") {
  const auto X = column({-3, -2, -1, 1, 2, 3});
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  const auto tree = fit_tree(X, y, {});
  CHECK(tree.depth() == 1);
  CHECK(tree.root().feature == 0);
  CHECK(tree.root().threshold == 0.0);
  CHECK(train_accuracy(tree, X, y) == 1.0);
}

TEST_CASE("single-label data is one leaf") {
  const auto X = column({1, 2, 3});
  const auto tree = fit_tree(X, std::vector<int>{4, 4, 4}, {});
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.root().is_leaf());
  const double probe[] = {100.0};
  CHECK(tree.predict(probe).label == 4);
  CHECK(tree.predict(probe).probabilities[4] == 1.0);
}

TEST_CASE("XOR needs depth two") {
  Matrix X(4, 2);
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (std::size_t i = 0; i < 4; ++i) {
    X(i, 0) = pts[i][0];
    X(i, 1) = pts[i][1];
  }
  const std::vector<int> y = {0, 1, 1, 0};
  for (auto c : {Criterion::Gini, Criterion::Entropy}) {
    CHECK(train_accuracy(fit_tree(X, y, {c, 2, 1, 0}), X, y) == 1.0);
    CHECK(train_accuracy(fit_tree(X, y, {c, 1, 1, 0}), X, y) <= 0.75);
  }
}

TEST_CASE("a value equal to the threshold goes left") {
  const auto X = column({0, 0, 2, 2});
  const auto tree = fit_tree(X, std::vector<int>{1, 1, 3, 3}, {});
  REQUIRE(tree.root().threshold == 1.0);
  const double at[] = {1.0};
  const double above[] = {std::nextafter(1.0, 2.0)};
  CHECK(tree.predict(at).label == 1);
  CHECK(tree.predict(above).label == 3);
}

TEST_CASE("adjacent doubles still produce a usable threshold") {
  const double a = 1.0, b = std::nextafter(1.0, 2.0);
  const auto X = column({a, b});
  const auto tree = fit_tree(X, std::vector<int>{0, 1}, {});
  CHECK(train_accuracy(tree, X, {0, 1}) == 1.0);
}

TEST_CASE("unlimited trees memorize conflict-free data") {
  Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 10 + rng.index(60);
    const auto X = testing::random_matrix(rng, n, 5);
    std::vector<int> y(n);
    for (auto& l : y) l = static_cast<int>(rng.index(7));
    CHECK(train_accuracy(fit_tree(X, y, {Criterion::Entropy, std::nullopt, 1, 0}), X, y) == 1.0);
  }
}

TEST_CASE("depth and leaf-size limits are honoured") {
  Rng rng(33);
  const auto X = testing::random_matrix(rng, 80, 4);
  std::vector<int> y(80);
  for (auto& l : y) l = static_cast<int>(rng.index(3));
  CHECK(fit_tree(X, y, {Criterion::Gini, 3, 1, 0}).depth() <= 3);
  const auto tree = fit_tree(X, y, {Criterion::Gini, std::nullopt, 7, 0});
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) CHECK(std::accumulate(node.counts.begin(), node.counts.end(), 0ul) >= 7);
  }
}

TEST_CASE("a degenerate forest equals a single tree") {
  Rng rng(34);
  const auto X = testing::random_matrix(rng, 60, 136);
  std::vector<int> y(60);
  for (auto& l : y) l = static_cast<int>(rng.index(7));
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.features_per_split = 136;
  const auto rf = fit_forest(X, y, fp);
  const auto tree = fit_tree(X, y, fp.tree);
  const auto probes = testing::random_matrix(rng, 50, 136);
  for (std::size_t i = 0; i < probes.rows(); ++i) {
    CHECK(rf.predict(probes.row(i)) == tree.predict(probes.row(i)).label);
  }
  CHECK(to_json(rf.trees()[0]) == to_json(tree));
}

TEST_CASE("the same seed gives the same forest") {
  Rng rng(35);
  const auto X = testing::random_matrix(rng, 40, 20);
  std::vector<int> y(40);
  for (auto& l : y) l = static_cast<int>(rng.index(4));
  ForestParams fp;
  fp.n_trees = 15;
  fp.features_per_split = 4;
  fp.rng_seed = 99;
  CHECK(to_json(fit_forest(X, y, fp)).dump() == to_json(fit_forest(X, y, fp)).dump());
  fp.rng_seed = 100;
  const auto other = to_json(fit_forest(X, y, fp)).dump();
  fp.rng_seed = 99;
  CHECK(other != to_json(fit_forest(X, y, fp)).dump());
}

TEST_CASE("forest votes break ties toward the lowest label") {
  const auto X = column({0, 1});
  const auto anger = fit_tree(X, std::vector<int>{0, 0}, {});
  const auto contempt = fit_tree(X, std::vector<int>{1, 1}, {});
  const RandomForest tie({contempt, anger}, {});
  const double x[] = {0.5};
  CHECK(tie.predict(x) == label_index(Emotion::Anger));
  const RandomForest agree({contempt, contempt, anger}, {});
  CHECK(agree.predict(x) == label_index(Emotion::Contempt));
  const RandomForest single({contempt}, {});
  CHECK(single.predict(x) == contempt.predict(x).label);
  CHECK(argmax_label({0, 2, 2, 0, 0, 0, 0}) == 1);
}

TEST_CASE("tree JSON round-trips") {
  Rng rng(36);
  const auto X = testing::random_matrix(rng, 30, 3);
  std::vector<int> y(30);
  for (auto& l : y) l = static_cast<int>(rng.index(5));
  const auto tree = fit_tree(X, y, {});
  const auto j = to_json(tree);
  CHECK(j.at("root").contains("feature_index"));
  CHECK(j.at("root").contains("threshold"));
  CHECK(j.at("root").contains("class_counts"));
  const auto back = tree_from_json(j);
  CHECK(to_json(back) == j);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    CHECK(back.predict(X.row(i)).label == tree.predict(X.row(i)).label);
  }
}

TEST_CASE("a forest is at least as accurate as one tree on noisy data") {
  const auto ds = synth::generate(synth::separable7_spec(1, 24, 6.0));
  const auto fm = build_feature_matrix(ds, FeatureMode::Displacement);
  const auto tree = eval::cross_validate(eval::ModelKind::Tree,
                                         eval::default_config(eval::ModelKind::Tree), fm.X,
                                         fm.labels, 4, 1);
  const auto forest = eval::cross_validate(eval::ModelKind::Forest,
                                           eval::default_config(eval::ModelKind::Forest), fm.X,
                                           fm.labels, 4, 1);
  MESSAGE("noisy tree ", tree.mean_accuracy, " forest ", forest.mean_accuracy);
  CHECK(forest.mean_accuracy >= tree.mean_accuracy);
}

TEST_CASE("criteria parse by name") {
  CHECK(parse_criterion("gini") == Criterion::Gini);
  CHECK(parse_criterion("entropy") == Criterion::Entropy);
  CHECK_THROWS_AS(parse_criterion("mse"), Error);
}
