#include "triage/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "triage/parallel.hpp"
#include "triage/rng.hpp"

namespace triage {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::NaiveBayes: return "nb";
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::LinearSvm: return "svm";
  }
  return "?";
}

ClassifierKind classifier_from_string(const std::string& name) {
  if (name == "nb" || name == "naive_bayes" || name == "bayes") {
    return ClassifierKind::NaiveBayes;
  }
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "svm" || name == "linear_svm") return ClassifierKind::LinearSvm;
  throw DataError("unknown classifier: " + name);
}

namespace {

// Model class ids are the present corpus classes in ascending order.
struct ClassMap {
  std::vector<int> model_of_corpus;  // corpus class id -> model id or -1
  std::vector<int> corpus_of_model;
};

ClassMap map_classes(const Corpus& corpus) {
  ClassMap map;
  map.model_of_corpus.assign(corpus.developers.size(), -1);
  for (int c : corpus.present_classes()) {
    map.model_of_corpus[static_cast<std::size_t>(c)] =
        static_cast<int>(map.corpus_of_model.size());
    map.corpus_of_model.push_back(c);
  }
  return map;
}

TriageModel base_model(const Corpus& corpus, ClassifierKind kind, const ClassMap& map) {
  TriageModel model;
  model.kind = kind;
  model.vocabulary = corpus.vocabulary;
  for (int c : map.corpus_of_model) {
    model.class_devs.push_back(corpus.developers[static_cast<std::size_t>(c)]);
  }
  return model;
}

}  // namespace

TriageModel train_naive_bayes(const Corpus& train, double smoothing) {
  if (train.doc_count() == 0) throw DataError("degenerate training set: no documents");
  if (smoothing <= 0.0) throw DataError("naive Bayes smoothing must be positive");
  const ClassMap map = map_classes(train);
  TriageModel model = base_model(train, ClassifierKind::NaiveBayes, map);
  model.smoothing = smoothing;

  const auto n_classes = static_cast<Eigen::Index>(model.class_count());
  const auto n_words = static_cast<Eigen::Index>(train.word_count());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_classes, n_words);
  Eigen::VectorXd doc_counts = Eigen::VectorXd::Zero(n_classes);
  for (Eigen::Index i = 0; i < train.matrix.rows(); ++i) {
    const int c = map.model_of_corpus[static_cast<std::size_t>(
        train.labels[static_cast<std::size_t>(i)])];
    doc_counts(c) += 1.0;
    for (TermMatrix::InnerIterator it(train.matrix, i); it; ++it) {
      counts(c, it.col()) += it.value();
    }
  }
  const double m = static_cast<double>(train.doc_count());
  model.log_prior.resize(n_classes);
  model.log_likelihood.resize(n_classes, n_words);
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    model.log_prior(c) = std::log(doc_counts(c) / m);
    const double total = counts.row(c).sum() + smoothing * static_cast<double>(n_words);
    for (Eigen::Index w = 0; w < n_words; ++w) {
      model.log_likelihood(c, w) = std::log((counts(c, w) + smoothing) / total);
    }
  }
  return model;
}

TriageModel train_knn(const Corpus& train, int neighbors) {
  if (train.doc_count() == 0) throw DataError("degenerate training set: no documents");
  if (neighbors < 1) throw DataError("knn neighbor count must be >= 1");
  const ClassMap map = map_classes(train);
  TriageModel model = base_model(train, ClassifierKind::Knn, map);
  model.neighbors = neighbors;
  model.train_matrix = train.matrix;
  model.train_norms.resize(train.matrix.rows());
  for (Eigen::Index i = 0; i < train.matrix.rows(); ++i) {
    model.train_labels.push_back(map.model_of_corpus[static_cast<std::size_t>(
        train.labels[static_cast<std::size_t>(i)])]);
    double sq = 0.0;
    for (TermMatrix::InnerIterator it(train.matrix, i); it; ++it) {
      sq += it.value() * it.value();
    }
    model.train_norms(i) = std::sqrt(sq);
  }
  return model;
}

TriageModel train_linear_svm(const Corpus& train, const ClassifierParams& params) {
  if (train.doc_count() == 0) throw DataError("degenerate training set: no documents");
  const ClassMap map = map_classes(train);
  if (map.corpus_of_model.size() < 2) {
    throw DataError("degenerate training set: fewer than two classes");
  }
  TriageModel model = base_model(train, ClassifierKind::LinearSvm, map);
  const auto n_classes = static_cast<std::size_t>(model.class_count());
  const auto n_words = static_cast<Eigen::Index>(train.word_count());
  const auto m = static_cast<std::size_t>(train.doc_count());
  model.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_classes), n_words);
  model.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_classes));

  std::vector<int> model_labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    model_labels[i] = map.model_of_corpus[static_cast<std::size_t>(train.labels[i])];
  }

  parallel_for(n_classes, [&](std::size_t c) {
    Rng rng = derive_rng(params.seed, c);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_words);
    double b = 0.0;
    std::size_t t = 0;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      shuffle_indices(order, rng);
      for (std::size_t i : order) {
        const double lr =
            params.learning_rate /
            (1.0 + params.learning_rate * params.reg * static_cast<double>(t));
        ++t;
        const double y = model_labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
        double margin = b;
        for (TermMatrix::InnerIterator it(train.matrix, static_cast<Eigen::Index>(i));
             it; ++it) {
          margin += w(it.col()) * it.value();
        }
        w *= 1.0 - lr * params.reg;
        if (y * margin < 1.0) {
          for (TermMatrix::InnerIterator it(train.matrix, static_cast<Eigen::Index>(i));
               it; ++it) {
            w(it.col()) += lr * y * it.value();
          }
          b += lr * y;
        }
      }
    }
    model.weights.row(static_cast<Eigen::Index>(c)) = w.transpose();
    model.bias(static_cast<Eigen::Index>(c)) = b;
  });
  return model;
}

TriageModel train_classifier(const Corpus& train, ClassifierKind kind,
                             const ClassifierParams& params) {
  switch (kind) {
    case ClassifierKind::NaiveBayes: return train_naive_bayes(train, params.smoothing);
    case ClassifierKind::Knn: return train_knn(train, params.neighbors);
    case ClassifierKind::LinearSvm: return train_linear_svm(train, params);
  }
  throw DataError("unknown classifier kind");
}

Eigen::VectorXd TriageModel::scores(const SparseRow& doc) const {
  const auto n_classes = static_cast<Eigen::Index>(class_count());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_classes);
  switch (kind) {
    case ClassifierKind::NaiveBayes: {
      out = log_prior;
      for (SparseRow::InnerIterator it(doc); it; ++it) {
        out += it.value() * log_likelihood.col(it.index());
      }
      return out;
    }
    case ClassifierKind::Knn: {
      double sq = 0.0;
      for (SparseRow::InnerIterator it(doc); it; ++it) sq += it.value() * it.value();
      const double qn = std::sqrt(sq);
      const auto m = train_matrix.rows();
      std::vector<double> sims(static_cast<std::size_t>(m), 0.0);
      for (Eigen::Index i = 0; i < m; ++i) {
        if (qn == 0.0 || train_norms(i) == 0.0) continue;
        double dot = 0.0;
        for (TermMatrix::InnerIterator it(train_matrix, i); it; ++it) {
          dot += it.value() * doc.coeff(it.col());
        }
        sims[static_cast<std::size_t>(i)] = dot / (qn * train_norms(i));
      }
      std::vector<std::size_t> order(sims.size());
      std::iota(order.begin(), order.end(), 0);
      const auto depth = std::min<std::size_t>(static_cast<std::size_t>(neighbors),
                                               order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(depth),
                        order.end(), [&](std::size_t a, std::size_t b) {
                          if (sims[a] != sims[b]) return sims[a] > sims[b];
                          return a < b;
                        });
      for (std::size_t r = 0; r < depth; ++r) {
        out(train_labels[order[r]]) += sims[order[r]];
      }
      return out;
    }
    case ClassifierKind::LinearSvm: {
      out = bias;
      for (SparseRow::InnerIterator it(doc); it; ++it) {
        out += it.value() * weights.col(it.index());
      }
      return out;
    }
  }
  throw DataError("unknown classifier kind");
}

namespace {

std::vector<int> ranked_classes(const Eigen::VectorXd& scores) {
  std::vector<int> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  return order;
}

}  // namespace

RecommendationList recommend(const TriageModel& model, const SparseRow& doc, int k) {
  if (k < 1) throw DataError("recommend: k must be >= 1");
  const Eigen::VectorXd scores = model.scores(doc);
  const auto order = ranked_classes(scores);
  RecommendationList list;
  const auto depth = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  for (std::size_t r = 0; r < depth; ++r) {
    list.entries.push_back({model.class_devs[static_cast<std::size_t>(order[r])],
                            scores(order[r])});
  }
  return list;
}

AccuracyCurve evaluate_curve(const TriageModel& model, const Corpus& test, int k_max) {
  if (test.doc_count() == 0) throw DataError("evaluate_curve: empty test set");
  if (k_max < 1) throw DataError("evaluate_curve: k_max must be >= 1");

  std::unordered_map<std::string, int> model_word;
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    model_word.emplace(model.vocabulary[i], static_cast<int>(i));
  }
  std::vector<int> col_map(test.word_count(), -1);
  for (std::size_t c = 0; c < test.vocabulary.size(); ++c) {
    auto it = model_word.find(test.vocabulary[c]);
    if (it != model_word.end()) col_map[c] = it->second;
  }
  std::unordered_map<std::string, int> dev_to_model;
  for (std::size_t c = 0; c < model.class_devs.size(); ++c) {
    dev_to_model.emplace(model.class_devs[c], static_cast<int>(c));
  }

  const auto m = test.doc_count();
  // Rank of the true developer per test document (or npos when unranked).
  std::vector<std::size_t> truth_rank(m, std::string::npos);
  parallel_for(m, [&](std::size_t i) {
    SparseRow query(static_cast<Eigen::Index>(model.word_count()));
    std::vector<std::pair<int, double>> mapped;
    for (TermMatrix::InnerIterator it(test.matrix, static_cast<Eigen::Index>(i)); it;
         ++it) {
      const int col = col_map[static_cast<std::size_t>(it.col())];
      if (col >= 0) mapped.emplace_back(col, it.value());
    }
    std::sort(mapped.begin(), mapped.end());
    query.reserve(static_cast<Eigen::Index>(mapped.size()));
    for (const auto& [col, tf] : mapped) query.insertBack(col) = tf;

    auto truth = dev_to_model.find(
        test.developers[static_cast<std::size_t>(test.labels[i])]);
    if (truth == dev_to_model.end()) return;
    const auto order = ranked_classes(model.scores(query));
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (order[r] == truth->second) {
        truth_rank[i] = r;
        break;
      }
    }
  });

  AccuracyCurve curve;
  curve.total = m;
  curve.correct_at_k.assign(static_cast<std::size_t>(k_max), 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (truth_rank[i] == std::string::npos) continue;
    for (std::size_t k = truth_rank[i]; k < static_cast<std::size_t>(k_max); ++k) {
      curve.correct_at_k[k]++;
    }
  }
  for (std::size_t k = 0; k < curve.correct_at_k.size(); ++k) {
    curve.accuracy.push_back(static_cast<double>(curve.correct_at_k[k]) /
                             static_cast<double>(m));
  }
  return curve;
}

}  // namespace triage
