#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "triage/metrics.hpp"

using namespace triage;
using doctest::Approx;

TEST_SUITE("metrics") {

TEST_CASE("accuracy_at_k counts hits inside the top k") {
  std::vector<std::vector<std::string>> ranked = {
      {"amy", "bob", "cat"},
      {"bob", "amy", "cat"},
      {"cat", "bob", "amy"},
      {"bob", "cat"},
  };
  std::vector<std::string> truths = {"amy", "amy", "amy", "amy"};
  CHECK(accuracy_at_k(ranked, truths, 1) == Approx(0.25));
  CHECK(accuracy_at_k(ranked, truths, 2) == Approx(0.5));
  CHECK(accuracy_at_k(ranked, truths, 3) == Approx(0.75));
  CHECK(accuracy_at_k(ranked, truths, 10) == Approx(0.75));  // short lists stay short

  CHECK_THROWS_AS(accuracy_at_k({}, {}, 1), DataError);
  CHECK_THROWS_AS(accuracy_at_k(ranked, {"amy"}, 1), DataError);
  CHECK_THROWS_AS(accuracy_at_k(ranked, truths, 0), DataError);
}

TEST_CASE("loss_k measures relative accuracy change") {
  CHECK(loss_k(0.8, 0.6) == Approx(0.25));
  CHECK(loss_k(0.8, 0.8) == Approx(0.0));
  CHECK(loss_k(0.8, 1.0) == Approx(-0.25));  // reduction can help
  CHECK_THROWS_AS(loss_k(0.0, 0.5), DataError);
  CHECK_THROWS_AS(loss_k(-0.1, 0.5), DataError);
}

TEST_CASE("f1_score is the harmonic mean with a zero guard") {
  CHECK(f1_score(0.5, 0.5) == Approx(0.5));
  CHECK(f1_score(1.0, 0.0) == Approx(0.0));
  CHECK(f1_score(0.0, 0.0) == Approx(0.0));
  CHECK(f1_score(0.133, 0.044) == Approx(2.0 * 0.133 * 0.044 / 0.177));
  CHECK(f1_score(0.25, 0.75) == Approx(0.375));
}

TEST_CASE("class_metrics derives per-class rates from a confusion matrix") {
  Eigen::MatrixXd confusion(3, 3);
  confusion << 5, 1, 0,
               2, 3, 1,
               0, 0, 4;
  auto metrics = class_metrics(confusion);
  CHECK(metrics.accuracy == Approx(12.0 / 16.0));
  REQUIRE(metrics.precision.size() == 3);
  CHECK(metrics.precision[0] == Approx(5.0 / 7.0));
  CHECK(metrics.precision[1] == Approx(3.0 / 4.0));
  CHECK(metrics.precision[2] == Approx(4.0 / 5.0));
  CHECK(metrics.recall[0] == Approx(5.0 / 6.0));
  CHECK(metrics.recall[1] == Approx(0.5));
  CHECK(metrics.recall[2] == Approx(1.0));
  CHECK(metrics.f1[0] == Approx(10.0 / 13.0));
  CHECK(metrics.f1[1] == Approx(0.6));
  CHECK(metrics.f1[2] == Approx(8.0 / 9.0));
}

TEST_CASE("class_metrics zeroes rates for absent classes") {
  Eigen::MatrixXd confusion(2, 2);
  confusion << 3, 0,
               0, 0;  // class 1 never occurs and is never predicted
  auto metrics = class_metrics(confusion);
  CHECK(metrics.precision[1] == 0.0);
  CHECK(metrics.recall[1] == 0.0);
  CHECK(metrics.f1[1] == 0.0);
  CHECK(metrics.accuracy == Approx(1.0));

  CHECK_THROWS_AS(class_metrics(Eigen::MatrixXd(2, 3)), DataError);
  CHECK_THROWS_AS(class_metrics(Eigen::MatrixXd(0, 0)), DataError);
  Eigen::MatrixXd negative(2, 2);
  negative << 1, -1, 0, 2;
  CHECK_THROWS_AS(class_metrics(negative), DataError);
}

TEST_CASE("wilcoxon matches hand-computed exact cases") {
  // Eight pairs, differences 1.5 -0.5 2.5 3.0 -1.0 4.0 5.5 6.0.
  std::vector<std::pair<double, double>> pairs = {
      {2.5, 1.0}, {1.0, 1.5}, {4.0, 1.5}, {5.0, 2.0},
      {1.0, 2.0}, {6.0, 2.0}, {7.5, 2.0}, {8.0, 2.0},
  };
  auto result = wilcoxon_signed_rank(pairs);
  CHECK(result.n_used == 8);
  CHECK(result.exact);
  CHECK(result.statistic == Approx(3.0));
  CHECK(result.p_value == Approx(10.0 / 256.0));

  auto one_sided = wilcoxon_signed_rank(pairs, false);
  CHECK(one_sided.p_value == Approx(5.0 / 256.0));
}

TEST_CASE("wilcoxon handles tied magnitudes and zero differences") {
  // Differences 1 -1 2 2 3 plus a dropped zero.
  std::vector<std::pair<double, double>> pairs = {
      {1.0, 0.0}, {0.0, 1.0}, {2.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}, {5.0, 5.0},
  };
  auto result = wilcoxon_signed_rank(pairs);
  CHECK(result.n_used == 5);
  CHECK(result.exact);
  CHECK(result.statistic == Approx(1.5));
  CHECK(result.p_value == Approx(6.0 / 32.0));

  // Perfectly antisymmetric differences: no evidence at all.
  std::vector<std::pair<double, double>> balanced = {
      {2.0, 0.0}, {0.0, 2.0}, {1.0, 0.0}, {0.0, 1.0},
  };
  auto flat = wilcoxon_signed_rank(balanced);
  CHECK(flat.statistic == Approx(5.0));
  CHECK(flat.p_value == Approx(1.0));

  CHECK_THROWS_AS(wilcoxon_signed_rank({{1.0, 1.0}, {2.0, 2.0}}), DataError);
  CHECK_THROWS_AS(wilcoxon_signed_rank({}), DataError);
}

TEST_CASE("wilcoxon switches to the normal approximation above n = 12") {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 13; ++i) pairs.emplace_back(static_cast<double>(i), 0.0);
  auto result = wilcoxon_signed_rank(pairs);
  CHECK(result.n_used == 13);
  CHECK_FALSE(result.exact);
  CHECK(result.statistic == Approx(0.0));
  CHECK(result.p_value == Approx(0.001661694457983511).epsilon(1e-9));

  auto one_sided = wilcoxon_signed_rank(pairs, false);
  CHECK(one_sided.p_value == Approx(0.001661694457983511 / 2.0).epsilon(1e-9));
}

TEST_CASE("wilcoxon agrees with full enumeration on random small samples") {
  Rng rng = make_rng(2026);
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    const int n = 2 + static_cast<int>(rand_index(rng, 9));
    std::vector<std::pair<double, double>> pairs;
    bool any_nonzero = false;
    for (int i = 0; i < n; ++i) {
      // Half-integer magnitudes force frequent ties.
      double a = std::floor(rand_unit(rng) * 8.0) / 2.0;
      double b = std::floor(rand_unit(rng) * 8.0) / 2.0;
      if (a != b) any_nonzero = true;
      pairs.emplace_back(a, b);
    }
    if (!any_nonzero) pairs.emplace_back(1.0, 0.0);
    auto expected = test::oracle_wilcoxon_exact(pairs, true);
    auto actual = wilcoxon_signed_rank(pairs);
    REQUIRE(actual.exact);
    CHECK(actual.n_used == static_cast<std::size_t>(expected.n_used));
    CHECK(actual.statistic == Approx(expected.statistic).epsilon(1e-12));
    CHECK(actual.p_value == Approx(expected.p_value).epsilon(1e-12));

    auto expected_one = test::oracle_wilcoxon_exact(pairs, false);
    auto actual_one = wilcoxon_signed_rank(pairs, false);
    CHECK(actual_one.p_value == Approx(expected_one.p_value).epsilon(1e-12));
  }
}

TEST_CASE("top_s_developer_subset keeps the busiest developers") {
  std::vector<std::map<int, double>> docs(8, std::map<int, double>{{0, 1.0}});
  // amy x3, bob x2, cat x2, dan x1; bob/cat tie broken by name.
  std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 3};
  auto corpus = test::make_corpus({"aa"}, docs, labels, {"amy", "bob", "cat", "dan"});

  auto top2 = top_s_developer_subset(corpus, 2);
  CHECK(top2.doc_count() == 5);
  for (int label : top2.labels) CHECK((label == 0 || label == 1));

  auto top3 = top_s_developer_subset(corpus, 3);
  CHECK(top3.doc_count() == 7);

  auto all = top_s_developer_subset(corpus, 4);
  CHECK(all.doc_count() == 8);
  auto beyond = top_s_developer_subset(corpus, 99);
  CHECK(beyond.doc_count() == 8);

  CHECK_THROWS_AS(top_s_developer_subset(corpus, 1), DataError);
}

}  // TEST_SUITE
