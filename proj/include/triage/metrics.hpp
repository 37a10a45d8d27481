#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

// Fraction of queries whose true developer appears in the top-k list.
double accuracy_at_k(const std::vector<std::vector<std::string>>& ranked,
                     const std::vector<std::string>& truths, int k);

// Relative accuracy loss of a reduced model against the origin model.
double loss_k(double origin_accuracy, double reduced_accuracy);

struct ClassMetrics {
  Eigen::MatrixXd confusion;  // true class x predicted class, counts
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double accuracy = 0.0;
};

double f1_score(double precision, double recall);

// confusion(i, j) = number of instances of true class i predicted as j.
ClassMetrics class_metrics(const Eigen::MatrixXd& confusion);

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double p_value = 1.0;
  std::size_t n_used = 0;  // pairs left after dropping zero differences
  bool exact = false;
};

// Wilcoxon signed-rank test on paired samples (a_i, b_i). Exact for
// n_used <= 12, normal approximation with tie and continuity corrections
// otherwise. Two-sided by default.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    bool two_sided = true);

// Documents of the s most frequent developers (ties keep the
// lexicographically smaller developer id). s >= class count returns a copy.
Corpus top_s_developer_subset(const Corpus& corpus, int s);

}  // namespace triage
