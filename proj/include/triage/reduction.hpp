#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triage/classifiers.hpp"
#include "triage/corpus.hpp"
#include "triage/feature_selection.hpp"
#include "triage/instance_selection.hpp"

namespace triage {

enum class ReductionOrder { FsThenIs, IsThenFs };

const char* to_string(ReductionOrder order);
ReductionOrder order_from_string(const std::string& name);

struct ReductionPlan {
  ReductionOrder order = ReductionOrder::FsThenIs;
  FsAlgorithm fs = FsAlgorithm::CH;
  IsAlgorithm is = IsAlgorithm::ICF;
  double word_rate = 0.30;
  double bug_rate = 0.50;
  std::uint64_t seed = 0;
  ReliefFParams relief;
  LvqParams lvq;
};

struct ReductionAudit {
  std::size_t n_f = 0;  // word target of the feature-selection stage
  std::size_t m_i = 0;  // instance target of the instance-selection stage
  std::vector<std::string> removed_words;
  std::vector<RemovalRecord> removed_instances;
  std::vector<AuditEntry> blank_reports;  // emptied by the word cut
  std::size_t duplicate_reports_removed = 0;
  bool is_hit_target = true;
};

struct ReducedCorpus {
  Corpus corpus;
  ReductionAudit audit;
};

// Algorithm: apply feature selection and instance selection in the given
// order. Targets are ceil(rate * size) of the corpus each stage receives.
// Documents blanked by the word cut are removed and audited.
ReducedCorpus reduce(const Corpus& train, const ReductionPlan& plan);

struct OrderComparison {
  AccuracyCurve fs_then_is;
  AccuracyCurve is_then_fs;
  ReductionAudit fs_then_is_audit;
  ReductionAudit is_then_fs_audit;
  std::vector<int> winner;  // per k: +1 FS->IS, -1 IS->FS, 0 tie
};

// Reduces `train` both ways, trains the classifier on each result, and
// scores both on `test`.
OrderComparison compare_orders(const Corpus& train, const Corpus& test,
                               const ReductionPlan& plan, ClassifierKind classifier,
                               int k_max = 5, const ClassifierParams& params = {});

}  // namespace triage
