#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

enum class FsAlgorithm { IG, CH, SU, RF };

const char* to_string(FsAlgorithm algorithm);
FsAlgorithm fs_from_string(const std::string& name);

struct ReliefFParams {
  int neighbors = 5;
  int samples = 0;  // 0: min(500, doc count)
  std::uint64_t seed = 0;
};

struct WordScores {
  FsAlgorithm algorithm = FsAlgorithm::IG;
  Eigen::VectorXd scores;  // one per vocabulary column
};

WordScores score_ig(const Corpus& corpus);
WordScores score_chi2(const Corpus& corpus);
WordScores score_su(const Corpus& corpus);
WordScores score_relief_f(const Corpus& corpus, const ReliefFParams& params = {});
WordScores score_words(const Corpus& corpus, FsAlgorithm algorithm,
                       const ReliefFParams& relief = {});

struct TopWordsResult {
  Corpus corpus;
  std::vector<int> kept_cols;  // original column ids, ascending
  std::vector<std::string> removed_words;
  std::vector<AuditEntry> blank_docs;  // documents emptied by the cut
};

// Keeps the n_f best-scoring words (score ties keep the smaller column id)
// and drops documents that end up blank.
TopWordsResult select_top_words(const Corpus& corpus, const WordScores& scores, int n_f);

}  // namespace triage
