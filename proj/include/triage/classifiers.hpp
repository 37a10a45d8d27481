#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

enum class ClassifierKind { NaiveBayes, Knn, LinearSvm };

const char* to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& name);

struct ClassifierParams {
  double smoothing = 1.0;  // Laplace alpha for naive Bayes
  int neighbors = 10;      // k for the KNN recommender
  double reg = 1e-4;       // SVM L2 regularization
  int epochs = 10;         // SVM SGD passes
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

// A trained recommender. Queries are sparse rows over the model's own
// vocabulary; evaluate_curve() projects foreign corpora onto it by word.
struct TriageModel {
  ClassifierKind kind = ClassifierKind::NaiveBayes;
  std::vector<std::string> vocabulary;
  std::vector<std::string> class_devs;  // model class id -> developer

  // Naive Bayes
  Eigen::VectorXd log_prior;
  Eigen::MatrixXd log_likelihood;  // class x word
  double smoothing = 1.0;

  // KNN
  TermMatrix train_matrix;
  std::vector<int> train_labels;  // model class ids
  Eigen::VectorXd train_norms;
  int neighbors = 10;

  // Linear SVM (one vs rest)
  Eigen::MatrixXd weights;  // class x word
  Eigen::VectorXd bias;

  std::size_t class_count() const { return class_devs.size(); }
  std::size_t word_count() const { return vocabulary.size(); }

  // One score per model class; ranking these yields the recommendation.
  Eigen::VectorXd scores(const SparseRow& doc) const;
};

struct RecommendationEntry {
  std::string developer;
  double score = 0.0;
};

struct RecommendationList {
  std::vector<RecommendationEntry> entries;
};

TriageModel train_naive_bayes(const Corpus& train, double smoothing = 1.0);
TriageModel train_knn(const Corpus& train, int neighbors = 10);
TriageModel train_linear_svm(const Corpus& train, const ClassifierParams& params = {});
TriageModel train_classifier(const Corpus& train, ClassifierKind kind,
                             const ClassifierParams& params = {});

// Top-k developers by score, ties broken toward the smaller class id.
RecommendationList recommend(const TriageModel& model, const SparseRow& doc, int k);

struct AccuracyCurve {
  std::vector<std::size_t> correct_at_k;  // index k-1
  std::size_t total = 0;
  std::vector<double> accuracy;  // correct_at_k[i] / total
};

// Accuracy_k for k = 1..k_max on a test corpus sharing the training corpus's
// word strings (columns are matched by word, unknown words are ignored).
AccuracyCurve evaluate_curve(const TriageModel& model, const Corpus& test, int k_max);

}  // namespace triage
