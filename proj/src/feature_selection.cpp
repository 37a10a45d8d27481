#include "triage/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "triage/parallel.hpp"
#include "triage/rng.hpp"

namespace triage {

const char* to_string(FsAlgorithm algorithm) {
  switch (algorithm) {
    case FsAlgorithm::IG: return "ig";
    case FsAlgorithm::CH: return "ch";
    case FsAlgorithm::SU: return "su";
    case FsAlgorithm::RF: return "rf";
  }
  return "?";
}

FsAlgorithm fs_from_string(const std::string& name) {
  if (name == "ig") return FsAlgorithm::IG;
  if (name == "ch" || name == "chi2") return FsAlgorithm::CH;
  if (name == "su") return FsAlgorithm::SU;
  if (name == "rf" || name == "relieff" || name == "relief_f") return FsAlgorithm::RF;
  throw DataError("unknown feature selection algorithm: " + name);
}

namespace {

constexpr double kLog2 = 0.6931471805599453;

double log2_safe(double x) { return std::log(x) / kLog2; }

// Entropy (base 2) of a discrete distribution given by counts; 0 log 0 = 0.
double entropy_bits(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * log2_safe(p);
    }
  }
  return h;
}

// Per-class document presence counts: present(c, t) = documents of class c
// containing word t.
struct PresenceCounts {
  Eigen::MatrixXd present;    // class x word
  std::vector<double> df;     // documents containing word
  std::vector<double> n_c;    // documents per class
  double m = 0;
  std::vector<int> classes;   // present corpus class ids, row order
};

PresenceCounts count_presence(const Corpus& corpus) {
  PresenceCounts out;
  out.classes = corpus.present_classes();
  std::vector<int> row_of_class(corpus.developers.size(), -1);
  for (std::size_t r = 0; r < out.classes.size(); ++r) {
    row_of_class[static_cast<std::size_t>(out.classes[r])] = static_cast<int>(r);
  }
  out.present = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.classes.size()),
                                      static_cast<Eigen::Index>(corpus.word_count()));
  out.df.assign(corpus.word_count(), 0.0);
  out.n_c.assign(out.classes.size(), 0.0);
  out.m = static_cast<double>(corpus.doc_count());
  for (Eigen::Index i = 0; i < corpus.matrix.rows(); ++i) {
    const int r = row_of_class[static_cast<std::size_t>(
        corpus.labels[static_cast<std::size_t>(i)])];
    out.n_c[static_cast<std::size_t>(r)] += 1.0;
    for (TermMatrix::InnerIterator it(corpus.matrix, i); it; ++it) {
      out.present(r, it.col()) += 1.0;
      out.df[static_cast<std::size_t>(it.col())] += 1.0;
    }
  }
  return out;
}

double class_entropy(const PresenceCounts& counts) {
  return entropy_bits(counts.n_c, counts.m);
}

double ig_for_word(const PresenceCounts& counts, double h_class, std::size_t t) {
  const double df = counts.df[t];
  const double m = counts.m;
  const auto n_classes = counts.present.rows();
  double h_present = 0.0;
  double h_absent = 0.0;
  if (df > 0.0) {
    std::vector<double> with(static_cast<std::size_t>(n_classes));
    for (Eigen::Index c = 0; c < n_classes; ++c) {
      with[static_cast<std::size_t>(c)] = counts.present(c, static_cast<Eigen::Index>(t));
    }
    h_present = entropy_bits(with, df);
  }
  if (df < m) {
    std::vector<double> without(static_cast<std::size_t>(n_classes));
    for (Eigen::Index c = 0; c < n_classes; ++c) {
      without[static_cast<std::size_t>(c)] =
          counts.n_c[static_cast<std::size_t>(c)] -
          counts.present(c, static_cast<Eigen::Index>(t));
    }
    h_absent = entropy_bits(without, m - df);
  }
  const double p_t = df / m;
  return h_class - (p_t * h_present + (1.0 - p_t) * h_absent);
}

}  // namespace

WordScores score_ig(const Corpus& corpus) {
  const PresenceCounts counts = count_presence(corpus);
  WordScores out{FsAlgorithm::IG,
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corpus.word_count()))};
  if (counts.classes.size() < 2) return out;
  const double h_class = class_entropy(counts);
  parallel_for(corpus.word_count(), [&](std::size_t t) {
    out.scores(static_cast<Eigen::Index>(t)) = ig_for_word(counts, h_class, t);
  });
  return out;
}

WordScores score_chi2(const Corpus& corpus) {
  const PresenceCounts counts = count_presence(corpus);
  WordScores out{FsAlgorithm::CH,
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corpus.word_count()))};
  if (counts.classes.size() < 2) return out;
  const double m = counts.m;
  parallel_for(corpus.word_count(), [&](std::size_t t) {
    const double df = counts.df[t];
    double best = 0.0;
    for (Eigen::Index c = 0; c < counts.present.rows(); ++c) {
      const double a = counts.present(c, static_cast<Eigen::Index>(t));
      const double b = df - a;
      const double cc = counts.n_c[static_cast<std::size_t>(c)] - a;
      const double d = m - df - cc;
      const double denom = (a + cc) * (b + d) * (a + b) * (cc + d);
      if (denom > 0.0) {
        const double num = a * d - cc * b;
        best = std::max(best, m * num * num / denom);
      }
    }
    out.scores(static_cast<Eigen::Index>(t)) = best;
  });
  return out;
}

WordScores score_su(const Corpus& corpus) {
  const PresenceCounts counts = count_presence(corpus);
  WordScores out{FsAlgorithm::SU,
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corpus.word_count()))};
  if (counts.classes.size() < 2) return out;
  const double h_class = class_entropy(counts);
  parallel_for(corpus.word_count(), [&](std::size_t t) {
    const double df = counts.df[t];
    const double h_word = entropy_bits({df, counts.m - df}, counts.m);
    const double denom = h_word + h_class;
    if (denom > 0.0) {
      out.scores(static_cast<Eigen::Index>(t)) =
          2.0 * ig_for_word(counts, h_class, t) / denom;
    }
  });
  return out;
}

namespace {

// Normalized copy for Relief-F distances. With sparse data the per-word
// minimum is 0 unless the word occurs in every document, so normalization
// preserves sparsity.
TermMatrix normalize_min_max(const Corpus& corpus) {
  const auto n = static_cast<std::size_t>(corpus.word_count());
  const auto m = corpus.doc_count();
  std::vector<double> lo(n, 0.0), hi(n, 0.0), df(n, 0.0), min_pos(n, 0.0);
  for (Eigen::Index i = 0; i < corpus.matrix.rows(); ++i) {
    for (TermMatrix::InnerIterator it(corpus.matrix, i); it; ++it) {
      const auto t = static_cast<std::size_t>(it.col());
      df[t] += 1.0;
      hi[t] = std::max(hi[t], it.value());
      min_pos[t] = min_pos[t] == 0.0 ? it.value() : std::min(min_pos[t], it.value());
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    lo[t] = df[t] == static_cast<double>(m) ? min_pos[t] : 0.0;
  }
  TermMatrix out = corpus.matrix;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (TermMatrix::InnerIterator it(out, i); it; ++it) {
      const auto t = static_cast<std::size_t>(it.col());
      const double range = hi[t] - lo[t];
      it.valueRef() = range > 0.0 ? (it.value() - lo[t]) / range : 0.0;
    }
  }
  return out;
}

double manhattan(const TermMatrix& m, Eigen::Index a, Eigen::Index b) {
  double d = 0.0;
  TermMatrix::InnerIterator ia(m, a), ib(m, b);
  while (ia && ib) {
    if (ia.col() == ib.col()) {
      d += std::fabs(ia.value() - ib.value());
      ++ia;
      ++ib;
    } else if (ia.col() < ib.col()) {
      d += std::fabs(ia.value());
      ++ia;
    } else {
      d += std::fabs(ib.value());
      ++ib;
    }
  }
  for (; ia; ++ia) d += std::fabs(ia.value());
  for (; ib; ++ib) d += std::fabs(ib.value());
  return d;
}

}  // namespace

WordScores score_relief_f(const Corpus& corpus, const ReliefFParams& params) {
  if (params.neighbors < 1) throw DataError("relief-f neighbor count must be >= 1");
  const auto n = corpus.word_count();
  WordScores out{FsAlgorithm::RF, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
  const auto classes = corpus.present_classes();
  if (classes.size() < 2) return out;

  const auto m = corpus.doc_count();
  const TermMatrix norm = normalize_min_max(corpus);
  std::vector<double> prior(corpus.developers.size(), 0.0);
  for (int c : corpus.labels) prior[static_cast<std::size_t>(c)] += 1.0;
  for (double& p : prior) p /= static_cast<double>(m);

  std::size_t samples = params.samples > 0
                            ? std::min<std::size_t>(static_cast<std::size_t>(params.samples), m)
                            : std::min<std::size_t>(500, m);
  Rng rng = make_rng(params.seed);
  std::vector<std::size_t> anchors;
  if (samples >= m) {
    anchors.resize(m);
    std::iota(anchors.begin(), anchors.end(), 0);
  } else {
    anchors = sample_without_replacement(rng, m, samples);
  }

  // Per-anchor contributions are computed in parallel, then summed in anchor
  // order so the result does not depend on the thread count.
  const std::size_t block = 64;
  std::vector<Eigen::VectorXd> contrib(std::min(block, anchors.size()));
  const double k_nbr = static_cast<double>(params.neighbors);
  const double n_anchors = static_cast<double>(anchors.size());

  for (std::size_t base = 0; base < anchors.size(); base += block) {
    const std::size_t count = std::min(block, anchors.size() - base);
    parallel_for(count, [&](std::size_t slot) {
      const std::size_t a = anchors[base + slot];
      const int a_class = corpus.labels[a];
      Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

      std::vector<double> dist(m, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        if (j != a) {
          dist[j] = manhattan(norm, static_cast<Eigen::Index>(a),
                              static_cast<Eigen::Index>(j));
        }
      }
      auto accumulate = [&](int cls, double factor) {
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < m; ++j) {
          if (j != a && corpus.labels[j] == cls) members.push_back(j);
        }
        const auto depth = std::min<std::size_t>(
            static_cast<std::size_t>(params.neighbors), members.size());
        std::partial_sort(members.begin(),
                          members.begin() + static_cast<std::ptrdiff_t>(depth),
                          members.end(), [&](std::size_t x, std::size_t y) {
                            if (dist[x] != dist[y]) return dist[x] < dist[y];
                            return x < y;
                          });
        for (std::size_t r = 0; r < depth; ++r) {
          const auto nb = static_cast<Eigen::Index>(members[r]);
          TermMatrix::InnerIterator ia(norm, static_cast<Eigen::Index>(a));
          TermMatrix::InnerIterator ib(norm, nb);
          while (ia && ib) {
            if (ia.col() == ib.col()) {
              w(ia.col()) += factor * std::fabs(ia.value() - ib.value());
              ++ia;
              ++ib;
            } else if (ia.col() < ib.col()) {
              w(ia.col()) += factor * std::fabs(ia.value());
              ++ia;
            } else {
              w(ib.col()) += factor * std::fabs(ib.value());
              ++ib;
            }
          }
          for (; ia; ++ia) w(ia.col()) += factor * std::fabs(ia.value());
          for (; ib; ++ib) w(ib.col()) += factor * std::fabs(ib.value());
        }
      };

      accumulate(a_class, -1.0 / (n_anchors * k_nbr));
      const double anchor_prior = prior[static_cast<std::size_t>(a_class)];
      for (int cls : classes) {
        if (cls == a_class) continue;
        const double miss_weight =
            prior[static_cast<std::size_t>(cls)] / (1.0 - anchor_prior);
        accumulate(cls, miss_weight / (n_anchors * k_nbr));
      }
      contrib[slot] = std::move(w);
    });
    for (std::size_t slot = 0; slot < count; ++slot) {
      out.scores += contrib[slot];
    }
  }
  return out;
}

WordScores score_words(const Corpus& corpus, FsAlgorithm algorithm,
                       const ReliefFParams& relief) {
  switch (algorithm) {
    case FsAlgorithm::IG: return score_ig(corpus);
    case FsAlgorithm::CH: return score_chi2(corpus);
    case FsAlgorithm::SU: return score_su(corpus);
    case FsAlgorithm::RF: return score_relief_f(corpus, relief);
  }
  throw DataError("unknown feature selection algorithm");
}

TopWordsResult select_top_words(const Corpus& corpus, const WordScores& scores, int n_f) {
  const auto n = corpus.word_count();
  if (n_f < 1 || static_cast<std::size_t>(n_f) > n) {
    throw DataError("select_top_words: word target out of range");
  }
  if (static_cast<std::size_t>(scores.scores.size()) != n) {
    throw DataError("select_top_words: score vector size mismatch");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores.scores(a) != scores.scores(b)) return scores.scores(a) > scores.scores(b);
    return a < b;
  });
  std::vector<int> keep(order.begin(), order.begin() + n_f);
  std::sort(keep.begin(), keep.end());

  TopWordsResult out;
  ColumnSubset cut = subset_columns(corpus, keep);
  out.corpus = std::move(cut.corpus);
  out.kept_cols = std::move(keep);
  out.removed_words = std::move(cut.removed_words);
  out.blank_docs = std::move(cut.blank_docs);
  return out;
}

}  // namespace triage
