#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triage/attributes.hpp"
#include "triage/classifiers.hpp"
#include "triage/metrics.hpp"
#include "triage/reduction.hpp"
#include "triage/tree.hpp"

namespace triage {

enum class OrderLabel { FsThenIs = 0, IsThenFs = 1 };

const char* to_string(OrderLabel label);

// Labels a dataset with the better reduction order: 80/20 chronological
// split, both orders applied, the one winning more Accuracy_k comparisons
// (k = 1..k_max) wins; ties label IS->FS.
OrderLabel label_reduction_order(const Corpus& dataset, const ReductionPlan& plan,
                                 ClassifierKind classifier, int k_max = 5,
                                 const ClassifierParams& params = {});

enum class OrderClassifierKind { C45, AdaBoostResampling, AdaBoostReweighting };

const char* to_string(OrderClassifierKind kind);
OrderClassifierKind order_classifier_from_string(const std::string& name);

struct OrderModel {
  OrderClassifierKind kind = OrderClassifierKind::C45;
  NormalizationBounds bounds;
  std::optional<DecisionTree> tree;
  std::optional<AdaBoostEnsemble> ensemble;

  // Normalizes raw attributes with the stored bounds (clamped) and votes;
  // a tie predicts IS->FS.
  OrderLabel predict(const DatasetAttributes& attrs) const;
  OrderLabel predict_normalized(const Eigen::VectorXd& x) const;
};

OrderModel train_order_model(const Eigen::MatrixXd& normalized_rows,
                             const std::vector<OrderLabel>& labels,
                             const NormalizationBounds& bounds,
                             OrderClassifierKind kind, int rounds = 10,
                             std::uint64_t seed = 0);

struct CvConfig {
  OrderClassifierKind kind = OrderClassifierKind::C45;
  int folds = 10;
  int rounds = 10;  // AdaBoost rounds
  std::uint64_t seed = 0;
};

struct CvResult {
  ClassMetrics metrics;  // pooled over held-out folds
  std::vector<OrderModel> fold_models;
  std::vector<std::string> warnings;
};

// Seeded stratified k-fold cross validation over normalized attribute rows.
CvResult cross_validate(const Eigen::MatrixXd& rows, const std::vector<OrderLabel>& labels,
                        const NormalizationBounds& bounds, const CvConfig& config);

struct TopNodeRow {
  int level = 0;
  int frequency = 0;
  int attribute = 0;
  std::string code;
  std::string name;
};

// Attribute frequencies of internal nodes at levels 0..max_level across
// trees; rows below min_frequency are omitted. Sorted by level, then
// frequency descending, then attribute index.
std::vector<TopNodeRow> top_node_analysis(const std::vector<const DecisionTree*>& trees,
                                          int max_level = 2, int min_frequency = 2);

std::vector<const DecisionTree*> collect_trees(const std::vector<OrderModel>& models);

}  // namespace triage
