#pragma once

// Shared fixtures and reference oracles for the test suites. The oracles
// recompute published formulas from scratch so the library results can be
// checked against an independent source rather than against themselves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/rng.hpp"

namespace triage::test {

// Builds a corpus directly from per-document {column -> count} maps. Meta is
// filled with increasing ids and timestamps so row surgery stays traceable.
inline Corpus make_corpus(std::vector<std::string> vocabulary,
                          const std::vector<std::map<int, double>>& docs,
                          std::vector<int> labels,
                          std::vector<std::string> developers) {
  Corpus corpus;
  corpus.vocabulary = std::move(vocabulary);
  for (std::size_t c = 0; c < corpus.vocabulary.size(); ++c) {
    corpus.word_index[corpus.vocabulary[c]] = static_cast<int>(c);
  }
  corpus.labels = std::move(labels);
  corpus.developers = std::move(developers);
  corpus.matrix.resize(static_cast<Eigen::Index>(docs.size()),
                       static_cast<Eigen::Index>(corpus.vocabulary.size()));
  std::vector<Eigen::Triplet<double>> cells;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& [col, value] : docs[i]) {
      if (value != 0.0) {
        cells.emplace_back(static_cast<int>(i), col, value);
      }
    }
  }
  corpus.matrix.setFromTriplets(cells.begin(), cells.end());
  corpus.meta.resize(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    corpus.meta[i].bug_id = static_cast<std::int64_t>(i + 1);
    corpus.meta[i].reporter = "reporter";
    corpus.meta[i].opened_at = static_cast<std::int64_t>(1000 + i);
  }
  return corpus;
}

// Two-feature corpus of points on a circle of radius 10. Cosine distance
// between rows is then monotone in the angle gap, which makes neighborhood
// structure easy to pin down by hand.
inline Corpus angle_corpus(const std::vector<double>& degrees,
                           std::vector<int> labels, int n_classes) {
  constexpr double kPi = 3.14159265358979323846;
  std::vector<std::map<int, double>> docs;
  docs.reserve(degrees.size());
  for (double deg : degrees) {
    const double rad = deg * kPi / 180.0;
    std::map<int, double> row;
    const double x = 10.0 * std::cos(rad);
    const double y = 10.0 * std::sin(rad);
    if (x != 0.0) row[0] = x;
    if (y != 0.0) row[1] = y;
    docs.push_back(std::move(row));
  }
  std::vector<std::string> developers;
  for (int c = 0; c < n_classes; ++c) developers.push_back("dev" + std::to_string(c));
  return make_corpus({"xc", "yc"}, docs, std::move(labels), std::move(developers));
}

inline std::vector<std::size_t> kept_ids_to_rows(const Corpus& corpus,
                                                 const std::vector<std::int64_t>& ids) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < corpus.meta.size(); ++i) {
    if (std::find(ids.begin(), ids.end(), corpus.meta[i].bug_id) != ids.end()) {
      rows.push_back(i);
    }
  }
  return rows;
}

// --- reference feature scores ------------------------------------------------

inline double entropy_bits(const std::vector<double>& counts) {
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

struct PresenceTable {
  std::vector<double> with_word;     // per class, docs containing the word
  std::vector<double> without_word;  // per class, docs lacking it
};

inline PresenceTable presence_table(const Corpus& corpus, int col) {
  PresenceTable t;
  t.with_word.assign(corpus.class_count(), 0.0);
  t.without_word.assign(corpus.class_count(), 0.0);
  Eigen::MatrixXd dense = corpus.matrix;
  for (std::size_t i = 0; i < corpus.doc_count(); ++i) {
    const bool present = dense(static_cast<Eigen::Index>(i), col) > 0.0;
    (present ? t.with_word : t.without_word)[static_cast<std::size_t>(corpus.labels[i])] += 1.0;
  }
  return t;
}

inline double oracle_ig(const Corpus& corpus, int col) {
  const PresenceTable t = presence_table(corpus, col);
  std::vector<double> class_totals(corpus.class_count(), 0.0);
  double n_with = 0.0, n_without = 0.0;
  for (std::size_t c = 0; c < class_totals.size(); ++c) {
    class_totals[c] = t.with_word[c] + t.without_word[c];
    n_with += t.with_word[c];
    n_without += t.without_word[c];
  }
  const double n = n_with + n_without;
  double ig = entropy_bits(class_totals);
  if (n_with > 0.0) ig -= (n_with / n) * entropy_bits(t.with_word);
  if (n_without > 0.0) ig -= (n_without / n) * entropy_bits(t.without_word);
  return ig;
}

inline double oracle_chi2(const Corpus& corpus, int col) {
  const PresenceTable t = presence_table(corpus, col);
  const double n = static_cast<double>(corpus.doc_count());
  double best = 0.0;
  for (std::size_t c = 0; c < corpus.class_count(); ++c) {
    const double a = t.with_word[c];
    const double b = std::accumulate(t.with_word.begin(), t.with_word.end(), 0.0) - a;
    const double cc = t.without_word[c];
    const double d = std::accumulate(t.without_word.begin(), t.without_word.end(), 0.0) - cc;
    const double denom = (a + cc) * (b + d) * (a + b) * (cc + d);
    if (denom > 0.0) {
      const double diff = a * d - cc * b;
      best = std::max(best, n * diff * diff / denom);
    }
  }
  return best;
}

inline double oracle_su(const Corpus& corpus, int col) {
  const PresenceTable t = presence_table(corpus, col);
  std::vector<double> class_totals(corpus.class_count(), 0.0);
  double n_with = 0.0, n_without = 0.0;
  for (std::size_t c = 0; c < class_totals.size(); ++c) {
    class_totals[c] = t.with_word[c] + t.without_word[c];
    n_with += t.with_word[c];
    n_without += t.without_word[c];
  }
  const double denom = entropy_bits({n_with, n_without}) + entropy_bits(class_totals);
  if (denom <= 0.0) return 0.0;
  return 2.0 * oracle_ig(corpus, col) / denom;
}

// --- reference Wilcoxon signed-rank -------------------------------------------

struct OracleWilcoxon {
  double statistic = 0.0;
  double p_value = 1.0;
  int n_used = 0;
};

// Exact test by enumerating all 2^n sign assignments over the ranked |d|.
inline OracleWilcoxon oracle_wilcoxon_exact(const std::vector<std::pair<double, double>>& pairs,
                                            bool two_sided) {
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    const double d = a - b;
    if (d != 0.0) diffs.push_back(d);
  }
  const int n = static_cast<int>(diffs.size());
  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });
  std::vector<double> ranks(diffs.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) {
      ++j;
    }
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  double w_plus = 0.0, w_total = 0.0;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    if (diffs[k] > 0.0) w_plus += ranks[k];
    w_total += ranks[k];
  }
  const double w_minus = w_total - w_plus;

  OracleWilcoxon out;
  out.n_used = n;
  out.statistic = std::min(w_plus, w_minus);
  const double s_min = std::min(w_plus, w_minus);
  std::uint64_t hits_low = 0, hits_high = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double s = 0.0;
    for (int bit = 0; bit < n; ++bit) {
      if (mask & (std::uint64_t{1} << bit)) s += ranks[static_cast<std::size_t>(bit)];
    }
    if (s <= s_min + 1e-9) ++hits_low;
    if (s >= w_total - s_min - 1e-9) ++hits_high;
  }
  if (two_sided) {
    out.p_value = std::min(1.0, static_cast<double>(hits_low + hits_high) /
                                    static_cast<double>(total));
  } else {
    out.p_value = static_cast<double>(std::min(hits_low, hits_high)) /
                  static_cast<double>(total);
  }
  return out;
}

// --- random corpora for property tests ----------------------------------------

struct RandomCorpusSpec {
  std::uint64_t seed = 0;
  int max_docs = 50;
  int max_words = 30;
  int max_classes = 4;
  double density = 0.3;
  int max_count = 5;
};

inline Corpus random_corpus(const RandomCorpusSpec& spec) {
  Rng rng = make_rng(spec.seed);
  const int m = 4 + static_cast<int>(rand_index(rng, static_cast<std::size_t>(spec.max_docs - 3)));
  const int n = 2 + static_cast<int>(rand_index(rng, static_cast<std::size_t>(spec.max_words - 1)));
  const int k = 2 + static_cast<int>(rand_index(rng, static_cast<std::size_t>(spec.max_classes - 1)));
  std::vector<std::string> vocabulary;
  for (int c = 0; c < n; ++c) vocabulary.push_back("word" + std::to_string(c));
  std::vector<std::string> developers;
  for (int c = 0; c < k; ++c) developers.push_back("dev" + std::to_string(c));
  std::vector<std::map<int, double>> docs(static_cast<std::size_t>(m));
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    labels[static_cast<std::size_t>(i)] =
        (i < k) ? i  // every class occupied
                : static_cast<int>(rand_index(rng, static_cast<std::size_t>(k)));
    for (int c = 0; c < n; ++c) {
      if (rand_unit(rng) < spec.density) {
        docs[static_cast<std::size_t>(i)][c] = 1.0 + static_cast<double>(rand_index(
            rng, static_cast<std::size_t>(spec.max_count)));
      }
    }
    if (docs[static_cast<std::size_t>(i)].empty()) {
      docs[static_cast<std::size_t>(i)][static_cast<int>(rand_index(
          rng, static_cast<std::size_t>(n)))] = 1.0;
    }
  }
  return make_corpus(std::move(vocabulary), docs, std::move(labels), std::move(developers));
}

}  // namespace triage::test
