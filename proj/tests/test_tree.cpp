#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "triage/corpus.hpp"
#include "triage/tree.hpp"

using namespace triage;
using doctest::Approx;

namespace {

Eigen::MatrixXd column(const std::vector<double>& values) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows(static_cast<Eigen::Index>(i), 0) = values[i];
  }
  return rows;
}

Eigen::VectorXd ones(std::size_t n) {
  return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
}

Eigen::VectorXd point(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

}  // namespace

TEST_SUITE("tree") {

TEST_CASE("a pure sample becomes a single leaf") {
  auto tree = DecisionTree::train(column({1.0, 2.0, 3.0}), {1, 1, 1}, ones(3), 2);
  REQUIRE(tree.root() != nullptr);
  CHECK(tree.root()->is_leaf());
  CHECK(tree.node_count() == 1);
  CHECK(tree.leaf_count() == 1);
  CHECK(tree.predict(point(-100.0)) == 1);
  CHECK(tree.predict(point(100.0)) == 1);
  CHECK(tree.root()->class_weights(1) == Approx(3.0));
}

TEST_CASE("a separable sample splits at the midpoint") {
  C45Params params;
  params.prune = false;
  auto tree = DecisionTree::train(column({1.0, 2.0, 3.0, 4.0}), {0, 0, 1, 1},
                                  ones(4), 2, params);
  REQUIRE_FALSE(tree.root()->is_leaf());
  CHECK(tree.root()->attribute == 0);
  CHECK(tree.root()->threshold == Approx(2.5));
  CHECK(tree.node_count() == 3);
  CHECK(tree.leaf_count() == 2);
  CHECK(tree.predict(point(2.5)) == 0);  // left branch covers value <= threshold
  CHECK(tree.predict(point(2.51)) == 1);
  auto weights = tree.leaf_weights(point(0.0));
  CHECK(weights(0) == Approx(2.0));
  CHECK(weights(1) == Approx(0.0));
}

TEST_CASE("majority ties resolve toward the higher class index") {
  // Identical rows with one label each: no split is possible.
  auto tree = DecisionTree::train(column({1.0, 1.0}), {0, 1}, ones(2), 2);
  CHECK(tree.root()->is_leaf());
  CHECK(tree.root()->majority() == 1);
  CHECK(tree.predict(point(1.0)) == 1);

  TreeNode node;
  node.class_weights = Eigen::VectorXd::Zero(3);
  node.class_weights << 2.0, 5.0, 5.0;
  CHECK(node.majority() == 2);
  node.class_weights << 6.0, 5.0, 5.0;
  CHECK(node.majority() == 0);
}

TEST_CASE("instance weights act as multiplicities") {
  // Weight 2 on a row must match training on the duplicated row.
  Eigen::MatrixXd rows = column({1.0, 2.0, 3.0});
  Eigen::VectorXd weights(3);
  weights << 2.0, 1.0, 1.0;
  auto weighted = DecisionTree::train(rows, {0, 0, 1}, weights, 2);

  auto duplicated = DecisionTree::train(column({1.0, 1.0, 2.0, 3.0}), {0, 0, 0, 1},
                                        ones(4), 2);
  for (double x : {0.5, 1.5, 2.49, 2.51, 3.5}) {
    CAPTURE(x);
    CHECK(weighted.predict(point(x)) == duplicated.predict(point(x)));
  }
  CHECK(weighted.root()->class_weights.sum() == Approx(4.0));
}

TEST_CASE("pessimistic_errors reproduces the reference upper bounds") {
  const double cf = 0.25;
  CHECK(pessimistic_errors(10, 0, cf) == Approx(1.2944943670387588).epsilon(1e-12));
  CHECK(pessimistic_errors(10, 3, cf) == Approx(4.562369087617156).epsilon(1e-12));
  CHECK(pessimistic_errors(4, 1, cf) == Approx(2.1719911166685133).epsilon(1e-12));
  CHECK(pessimistic_errors(2, 1, cf) == Approx(1.791493043237269).epsilon(1e-12));
  CHECK(pessimistic_errors(8, 0.5, cf) == Approx(1.8220193851694122).epsilon(1e-12));
  CHECK(pessimistic_errors(3, 3, cf) == Approx(3.0));
  CHECK(pessimistic_errors(100, 10, cf) == Approx(12.749611451189867).epsilon(1e-12));
  CHECK(pessimistic_errors(6, 2, cf) == Approx(3.321325709462256).epsilon(1e-12));

  CHECK(pessimistic_errors(0, 0, cf) == 0.0);
  CHECK(pessimistic_errors(5, -1, cf) == Approx(pessimistic_errors(5, 0, cf)));
  CHECK_THROWS_AS(pessimistic_errors(5, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pessimistic_errors(5, 1, 1.0), std::invalid_argument);
}

TEST_CASE("pruning collapses splits that do not pay for themselves") {
  // One noisy row inside class 0. Unpruned, the tree isolates it with two
  // splits; the pessimistic bound says a single leaf is no worse.
  Eigen::MatrixXd rows = column({1.0, 2.0, 3.0, 4.0});
  std::vector<int> labels = {0, 1, 0, 0};

  C45Params keep;
  keep.prune = false;
  auto unpruned = DecisionTree::train(rows, labels, ones(4), 2, keep);
  CHECK(unpruned.node_count() > 1);

  auto pruned = DecisionTree::train(rows, labels, ones(4), 2);
  CHECK(pruned.node_count() == 1);
  CHECK(pruned.root()->is_leaf());
  CHECK(pruned.root()->majority() == 0);
  CHECK(pruned.predict(point(2.0)) == 0);  // the noise vanishes

  // A clean split survives pruning.
  auto clean = DecisionTree::train(column({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}),
                                   {0, 0, 0, 1, 1, 1}, ones(6), 2);
  CHECK(clean.node_count() == 3);
}

TEST_CASE("training rejects malformed inputs") {
  CHECK_THROWS_AS(DecisionTree::train(Eigen::MatrixXd(0, 1), {}, Eigen::VectorXd(), 2),
                  DataError);
  CHECK_THROWS_AS(DecisionTree::train(column({1.0}), {0, 1}, ones(1), 2), DataError);
  CHECK_THROWS_AS(DecisionTree::train(column({1.0}), {2}, ones(1), 2), DataError);
  CHECK_THROWS_AS(DecisionTree::train(column({1.0}), {-1}, ones(1), 2), DataError);
  Eigen::VectorXd negative(1);
  negative << -1.0;
  CHECK_THROWS_AS(DecisionTree::train(column({1.0}), {0}, negative, 2), DataError);
  DecisionTree blank;
  CHECK_THROWS_AS(blank.predict(point(0.0)), DataError);
}

TEST_CASE("reweighted adaboost reproduces the hand-traced votes") {
  // x = 0 0 1 1, labels 0 1 0 0. Round one errs on one quarter of the
  // weight (vote ln 3); round two on one sixth (vote ln 5).
  Eigen::MatrixXd rows = column({0.0, 0.0, 1.0, 1.0});
  std::vector<int> labels = {0, 1, 0, 0};
  AdaBoostParams params;
  params.variant = BoostVariant::Reweighting;
  params.rounds = 2;
  params.tree.prune = false;

  auto ensemble = AdaBoostEnsemble::train(rows, labels, 2, params);
  REQUIRE(ensemble.members().size() == 2);
  CHECK(ensemble.members()[0].vote == Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(ensemble.members()[1].vote == Approx(std::log(5.0)).epsilon(1e-12));

  // Round one classifies x = 0 as class 1; the heavier round two overrules.
  CHECK(ensemble.predict(point(0.0)) == 0);
  CHECK(ensemble.predict(point(1.0)) == 0);
  auto scores = ensemble.vote_scores(point(0.0));
  CHECK(scores(0) == Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(scores(1) == Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("a perfect first tree stops boosting with a capped vote") {
  auto ensemble = AdaBoostEnsemble::train(column({0.0, 1.0, 0.0, 1.0}), {0, 1, 0, 1},
                                          2, AdaBoostParams{});
  REQUIRE(ensemble.members().size() == 1);
  CHECK(ensemble.members()[0].vote ==
        Approx(std::log((1.0 - 1e-9) / 1e-9)).epsilon(1e-9));
  CHECK(ensemble.predict(point(0.0)) == 0);
  CHECK(ensemble.predict(point(1.0)) == 1);
}

TEST_CASE("an untrainable sample falls back to one unweighted tree") {
  // Identical feature vectors with a split vote: every stump errs on half
  // the weight, so boosting resets until the rounds run out.
  auto ensemble = AdaBoostEnsemble::train(column({5.0, 5.0}), {0, 1}, 2,
                                          AdaBoostParams{});
  REQUIRE(ensemble.members().size() == 1);
  CHECK(ensemble.members()[0].vote == Approx(1.0));
  CHECK(ensemble.predict(point(5.0)) == 1);  // leaf tie toward the higher class
}

TEST_CASE("resampled adaboost is deterministic in its seed") {
  Eigen::MatrixXd rows(8, 1);
  rows << 0, 1, 2, 3, 4, 5, 6, 7;
  std::vector<int> labels = {0, 0, 1, 0, 1, 1, 0, 1};
  AdaBoostParams params;
  params.variant = BoostVariant::Resampling;
  params.rounds = 4;
  params.seed = 12;

  auto a = AdaBoostEnsemble::train(rows, labels, 2, params);
  auto b = AdaBoostEnsemble::train(rows, labels, 2, params);
  REQUIRE(a.members().size() == b.members().size());
  for (std::size_t i = 0; i < a.members().size(); ++i) {
    CHECK(a.members()[i].vote == Approx(b.members()[i].vote).epsilon(1e-15));
  }
  for (double x : {0.5, 3.5, 6.5}) {
    CHECK(a.predict(point(x)) == b.predict(point(x)));
  }

  params.seed = 13;
  auto c = AdaBoostEnsemble::train(rows, labels, 2, params);
  CHECK(c.members().size() >= 1);  // may legitimately differ from `a`
}

TEST_CASE("adaboost validates its inputs") {
  CHECK_THROWS_AS(AdaBoostEnsemble::train(Eigen::MatrixXd(0, 1), {}, 2, {}), DataError);
  AdaBoostParams bad;
  bad.rounds = 0;
  CHECK_THROWS_AS(AdaBoostEnsemble::train(column({1.0}), {0}, 2, bad), DataError);
  AdaBoostEnsemble blank;
  CHECK_THROWS_AS(blank.predict(point(0.0)), DataError);
  CHECK(std::string(to_string(BoostVariant::Resampling)) == "resampling");
  CHECK(std::string(to_string(BoostVariant::Reweighting)) == "reweighting");
}

TEST_CASE("reset replaces the tree structure") {
  auto leaf = std::make_unique<TreeNode>();
  leaf->class_weights = Eigen::VectorXd::Zero(2);
  leaf->class_weights << 1.0, 4.0;
  DecisionTree tree;
  tree.reset(std::move(leaf), 2);
  CHECK(tree.class_count() == 2);
  CHECK(tree.predict(point(123.0)) == 1);
  CHECK(tree.node_count() == 1);
}

}  // TEST_SUITE
