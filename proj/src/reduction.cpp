#include "triage/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace triage {

const char* to_string(ReductionOrder order) {
  switch (order) {
    case ReductionOrder::FsThenIs: return "fs_is";
    case ReductionOrder::IsThenFs: return "is_fs";
  }
  return "?";
}

ReductionOrder order_from_string(const std::string& name) {
  if (name == "fs_is" || name == "fs->is" || name == "fs_then_is") {
    return ReductionOrder::FsThenIs;
  }
  if (name == "is_fs" || name == "is->fs" || name == "is_then_fs") {
    return ReductionOrder::IsThenFs;
  }
  throw DataError("unknown reduction order: " + name);
}

namespace {

std::size_t ceil_target(double rate, std::size_t size) {
  return static_cast<std::size_t>(
      std::ceil(rate * static_cast<double>(size) - 1e-12));
}

void count_duplicates(const Corpus& original, const std::vector<std::int64_t>& removed,
                      ReductionAudit& audit) {
  std::unordered_set<std::int64_t> dup_ids;
  for (const auto& meta : original.meta) {
    if (meta.duplicate_of) dup_ids.insert(meta.bug_id);
  }
  for (std::int64_t id : removed) {
    if (dup_ids.count(id)) audit.duplicate_reports_removed++;
  }
}

}  // namespace

ReducedCorpus reduce(const Corpus& train, const ReductionPlan& plan) {
  if (!(plan.word_rate > 0.0 && plan.word_rate <= 1.0) ||
      !(plan.bug_rate > 0.0 && plan.bug_rate <= 1.0)) {
    throw DataError("reduction rates must lie in (0, 1]");
  }
  if (train.doc_count() == 0 || train.word_count() == 0) {
    throw DataError("reduce: empty training corpus");
  }

  ReliefFParams relief = plan.relief;
  relief.seed = plan.seed;
  LvqParams lvq = plan.lvq;
  lvq.seed = plan.seed;

  ReducedCorpus out;
  ReductionAudit& audit = out.audit;
  std::vector<std::int64_t> removed_ids;

  if (plan.order == ReductionOrder::FsThenIs) {
    audit.n_f = ceil_target(plan.word_rate, train.word_count());
    WordScores scores = score_words(train, plan.fs, relief);
    TopWordsResult fs = select_top_words(train, scores, static_cast<int>(audit.n_f));
    audit.removed_words = std::move(fs.removed_words);
    audit.blank_reports = std::move(fs.blank_docs);
    if (fs.corpus.doc_count() == 0) {
      throw DataError("reduce: feature selection blanked every report");
    }

    audit.m_i = ceil_target(plan.bug_rate, fs.corpus.doc_count());
    SelectionResult is = select_instances(fs.corpus, plan.is, audit.m_i, lvq);
    audit.removed_instances = std::move(is.removals);
    audit.is_hit_target = is.hit_target;
    out.corpus = subset_rows(fs.corpus, is.kept);
  } else {
    audit.m_i = ceil_target(plan.bug_rate, train.doc_count());
    SelectionResult is = select_instances(train, plan.is, audit.m_i, lvq);
    audit.removed_instances = std::move(is.removals);
    audit.is_hit_target = is.hit_target;
    Corpus kept = subset_rows(train, is.kept);

    audit.n_f = ceil_target(plan.word_rate, kept.word_count());
    WordScores scores = score_words(kept, plan.fs, relief);
    TopWordsResult fs = select_top_words(kept, scores, static_cast<int>(audit.n_f));
    audit.removed_words = std::move(fs.removed_words);
    audit.blank_reports = std::move(fs.blank_docs);
    if (fs.corpus.doc_count() == 0) {
      throw DataError("reduce: feature selection blanked every report");
    }
    out.corpus = std::move(fs.corpus);
  }

  for (const auto& r : audit.removed_instances) removed_ids.push_back(r.bug_id);
  for (const auto& b : audit.blank_reports) removed_ids.push_back(b.bug_id);
  count_duplicates(train, removed_ids, audit);
  return out;
}

OrderComparison compare_orders(const Corpus& train, const Corpus& test,
                               const ReductionPlan& plan, ClassifierKind classifier,
                               int k_max, const ClassifierParams& params) {
  OrderComparison out;
  ReductionPlan fs_plan = plan;
  fs_plan.order = ReductionOrder::FsThenIs;
  ReductionPlan is_plan = plan;
  is_plan.order = ReductionOrder::IsThenFs;

  ReducedCorpus fs_first = reduce(train, fs_plan);
  ReducedCorpus is_first = reduce(train, is_plan);
  out.fs_then_is_audit = fs_first.audit;
  out.is_then_fs_audit = is_first.audit;

  const TriageModel fs_model = train_classifier(fs_first.corpus, classifier, params);
  const TriageModel is_model = train_classifier(is_first.corpus, classifier, params);
  out.fs_then_is = evaluate_curve(fs_model, test, k_max);
  out.is_then_fs = evaluate_curve(is_model, test, k_max);

  for (int k = 0; k < k_max; ++k) {
    const double a = out.fs_then_is.accuracy[static_cast<std::size_t>(k)];
    const double b = out.is_then_fs.accuracy[static_cast<std::size_t>(k)];
    out.winner.push_back(a > b ? 1 : (b > a ? -1 : 0));
  }
  return out;
}

}  // namespace triage
