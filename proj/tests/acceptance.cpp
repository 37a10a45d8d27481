// Acceptance checks. Each criterion prints one PASS/FAIL line with its
// runtime; the exit code is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "support.hpp"
#include "triage/attributes.hpp"
#include "triage/classifiers.hpp"
#include "triage/corpus.hpp"
#include "triage/feature_selection.hpp"
#include "triage/metrics.hpp"
#include "triage/order_prediction.hpp"
#include "triage/parallel.hpp"
#include "triage/reduction.hpp"

namespace {

using namespace triage;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

void expect_near(double actual, double want, double tol, const std::string& what) {
  if (!(std::abs(actual - want) <= tol)) {
    std::ostringstream os;
    os << what << ": got " << actual << ", want " << want << " +/- " << tol;
    throw Failure(os.str());
  }
}

int g_failures = 0;
long long g_total_ms = 0;

void run(const std::string& name, const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string error;
  try {
    body();
  } catch (const std::exception& e) {
    error = e.what();
  } catch (...) {
    error = "unknown exception";
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  g_total_ms += ms;
  if (error.empty()) {
    std::printf("PASS  %s  (%lld ms)\n", name.c_str(), static_cast<long long>(ms));
  } else {
    ++g_failures;
    std::printf("FAIL  %s  (%lld ms): %s\n", name.c_str(),
                static_cast<long long>(ms), error.c_str());
  }
  std::fflush(stdout);
}

// --- 1. F1 arithmetic on known-good precision/recall rows --------------------

struct MetricRow {
  double precision;  // percent
  double recall;     // percent
  double f1;         // percent, printed to one decimal
};

void criterion_metric_arithmetic() {
  // Six classifier/class combinations per collection, three collections.
  const std::vector<MetricRow> rows = {
      {13.3, 4.4, 6.7},   {84.9, 94.9, 89.6},  // tree, first collection
      {14.7, 11.1, 12.7}, {85.0, 88.6, 86.8},  // boosted by resampling
      {16.7, 15.6, 16.1}, {85.3, 86.3, 85.8},  // boosted by reweighting
      {48.0, 29.9, 36.9}, {63.5, 78.9, 70.3},  // tree, second collection
      {52.7, 56.1, 54.3}, {70.3, 67.4, 68.8},
      {49.5, 33.1, 39.7}, {64.3, 78.1, 70.5},
      {49.5, 50.5, 50.0}, {79.7, 79.1, 79.4},  // tree, merged collection
      {49.4, 40.1, 44.3}, {77.4, 83.3, 80.2},
      {51.3, 48.0, 49.6}, {79.4, 81.5, 80.4},
  };
  // The printed inputs carry at most 0.05pp rounding each; 0.2pp covers the
  // worst propagation through the harmonic mean plus the printed F1 rounding.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const double f1 = 100.0 * f1_score(row.precision / 100.0, row.recall / 100.0);
    expect_near(f1, row.f1, 0.2, "row " + std::to_string(i));
  }
  expect(f1_score(0.0, 0.0) == 0.0, "degenerate f1 must be zero");
}

// --- 2. unit splitting and cyclic window enumeration --------------------------

std::vector<RawBugReport> id_only_reports(std::int64_t count) {
  std::vector<RawBugReport> reports(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    reports[static_cast<std::size_t>(i)].id = i + 1;
    reports[static_cast<std::size_t>(i)].opened_at = i;
  }
  return reports;
}

// Keeps only each unit's first and last report. Unit count and boundary ids
// are preserved while the window enumeration stays cheap at full scale.
std::vector<std::vector<RawBugReport>> endpoints_only(
    std::vector<std::vector<RawBugReport>> units) {
  std::vector<std::vector<RawBugReport>> slim;
  slim.reserve(units.size());
  for (auto& unit : units) {
    slim.push_back({unit.front(), unit.back()});
  }
  return slim;
}

void criterion_counting_protocol() {
  {
    auto units = split_bug_units(id_only_reports(298785));
    expect(units.size() == 60, "expected 60 units, got " + std::to_string(units.size()));
    expect(units.front().size() == 5000, "first unit must hold 5000 reports");
    expect(units.back().size() == 3785,
           "tail unit must hold 3785 reports, got " + std::to_string(units.back().size()));
    expect(units.front().front().id == 1 && units.back().back().id == 298785,
           "unit boundaries must follow ascending bug ids");

    const auto slim = endpoints_only(std::move(units));
    const auto datasets = enumerate_window_datasets(slim, 5);
    expect(datasets.size() == 300,
           "expected 300 window datasets, got " + std::to_string(datasets.size()));
    for (std::size_t w = 1; w <= 5; ++w) {
      for (std::size_t s = 0; s < 60; ++s) {
        const auto& d = datasets[(w - 1) * 60 + s];
        expect(d.size() == 2 * w, "window dataset has wrong report count");
      }
    }
    // Window 2 starting at the last unit wraps around to the first.
    const auto& wrap = datasets[60 + 59];
    expect(wrap.size() == 4 && wrap[0].id == 295001 && wrap[1].id == 298785 &&
               wrap[2].id == 1 && wrap[3].id == 5000,
           "cyclic window must wrap from the tail unit to the first");
  }
  {
    auto units = split_bug_units(id_only_reports(281180));
    expect(units.size() == 57, "expected 57 units, got " + std::to_string(units.size()));
    expect(units.back().size() == 1180, "tail unit must hold 1180 reports");
    const auto slim = endpoints_only(std::move(units));
    const auto datasets = enumerate_window_datasets(slim, 7);
    expect(datasets.size() == 399,
           "expected 399 window datasets, got " + std::to_string(datasets.size()));
  }
}

// --- 3. scorers and the exact Wilcoxon test against independent oracles -------

void criterion_oracle_equivalence() {
  for (int i = 0; i < 100; ++i) {
    test::RandomCorpusSpec spec;
    spec.seed = 9000 + static_cast<std::uint64_t>(i);
    const Corpus corpus = test::random_corpus(spec);
    const WordScores ig = score_ig(corpus);
    const WordScores ch = score_chi2(corpus);
    const WordScores su = score_su(corpus);
    for (int col = 0; col < static_cast<int>(corpus.word_count()); ++col) {
      const std::string tag = "corpus " + std::to_string(i) + " col " + std::to_string(col);
      expect_near(ig.scores[col], test::oracle_ig(corpus, col), 1e-9, "ig " + tag);
      expect_near(ch.scores[col], test::oracle_chi2(corpus, col), 1e-9, "chi2 " + tag);
      expect_near(su.scores[col], test::oracle_su(corpus, col), 1e-9, "su " + tag);
    }
  }

  for (int n = 1; n <= 12; ++n) {
    std::mt19937 rng(40u + static_cast<unsigned>(n));
    std::uniform_int_distribution<int> magnitude(1, 2 * n);
    std::bernoulli_distribution coin;
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<std::pair<double, double>> pairs;
      for (int i = 0; i < n; ++i) {
        const double b = 10.0 + i;
        const double d = 0.5 * magnitude(rng) * (coin(rng) ? 1.0 : -1.0);
        pairs.emplace_back(b + d, b);
      }
      for (bool two_sided : {true, false}) {
        const WilcoxonResult got = wilcoxon_signed_rank(pairs, two_sided);
        const test::OracleWilcoxon want = test::oracle_wilcoxon_exact(pairs, two_sided);
        const std::string tag =
            "wilcoxon n=" + std::to_string(n) + " rep=" + std::to_string(rep);
        expect(got.exact, tag + ": expected the exact branch");
        expect(got.n_used == static_cast<std::size_t>(want.n_used), tag + ": n_used");
        expect_near(got.statistic, want.statistic, 1e-12, tag + ": statistic");
        expect_near(got.p_value, want.p_value, 1e-12, tag + ": p value");
      }
    }
  }
}

// --- 4. reduction invariants and determinism ----------------------------------

bool same_matrix(const TermMatrix& a, const TermMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const Eigen::MatrixXd da(a);
  const Eigen::MatrixXd db(b);
  return (da.array() == db.array()).all();
}

bool same_corpus(const Corpus& a, const Corpus& b) {
  if (a.vocabulary != b.vocabulary || a.developers != b.developers ||
      a.labels != b.labels || a.meta.size() != b.meta.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.meta.size(); ++i) {
    if (a.meta[i].bug_id != b.meta[i].bug_id) return false;
  }
  return same_matrix(a.matrix, b.matrix);
}

bool same_audit(const ReductionAudit& a, const ReductionAudit& b) {
  if (a.n_f != b.n_f || a.m_i != b.m_i || a.removed_words != b.removed_words ||
      a.duplicate_reports_removed != b.duplicate_reports_removed ||
      a.is_hit_target != b.is_hit_target ||
      a.removed_instances.size() != b.removed_instances.size() ||
      a.blank_reports.size() != b.blank_reports.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.removed_instances.size(); ++i) {
    const auto& x = a.removed_instances[i];
    const auto& y = b.removed_instances[i];
    if (x.bug_id != y.bug_id || x.removed_by != y.removed_by || x.iteration != y.iteration) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.blank_reports.size(); ++i) {
    if (a.blank_reports[i].bug_id != b.blank_reports[i].bug_id) return false;
  }
  return true;
}

std::size_t ceil_target(double rate, std::size_t size) {
  return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(size) - 1e-12));
}

void criterion_reduction_invariants() {
  const unsigned previous_budget = thread_budget();
  const FsAlgorithm fs_cycle[] = {FsAlgorithm::IG, FsAlgorithm::CH, FsAlgorithm::SU,
                                  FsAlgorithm::RF};
  const IsAlgorithm is_cycle[] = {IsAlgorithm::ICF, IsAlgorithm::LVQ, IsAlgorithm::DROP,
                                  IsAlgorithm::POP};
  for (int i = 0; i < 50; ++i) {
    test::RandomCorpusSpec spec;
    spec.seed = 4000 + static_cast<std::uint64_t>(i);
    const Corpus corpus = test::random_corpus(spec);

    ReductionPlan plan;
    plan.order = (i % 2 == 0) ? ReductionOrder::FsThenIs : ReductionOrder::IsThenFs;
    plan.is = is_cycle[i % 4];
    plan.fs = fs_cycle[(i / 4) % 4];
    plan.word_rate = 0.6;
    plan.bug_rate = 0.8;
    plan.seed = 100 + static_cast<std::uint64_t>(i);

    const std::string tag = "corpus " + std::to_string(i);
    const ReducedCorpus first = reduce(corpus, plan);
    first.corpus.check_invariants();

    expect(first.audit.n_f == ceil_target(plan.word_rate, corpus.word_count()),
           tag + ": word target");
    expect(first.corpus.word_count() == first.audit.n_f, tag + ": word count");
    expect(first.audit.removed_words.size() == corpus.word_count() - first.audit.n_f,
           tag + ": removed word count");
    if (first.audit.is_hit_target) {
      expect(first.corpus.doc_count() <= first.audit.m_i, tag + ": instance target");
    }
    expect(first.corpus.doc_count() + first.audit.removed_instances.size() +
                   first.audit.blank_reports.size() == corpus.doc_count(),
           tag + ": document conservation");

    std::set<std::int64_t> original_ids;
    for (const auto& meta : corpus.meta) original_ids.insert(meta.bug_id);
    for (const auto& meta : first.corpus.meta) {
      expect(original_ids.count(meta.bug_id) == 1, tag + ": kept id not in the input");
    }
    std::set<std::string> original_words(corpus.vocabulary.begin(), corpus.vocabulary.end());
    for (const auto& word : first.corpus.vocabulary) {
      expect(original_words.count(word) == 1, tag + ": kept word not in the input");
    }

    const ReducedCorpus again = reduce(corpus, plan);
    expect(same_corpus(first.corpus, again.corpus) && same_audit(first.audit, again.audit),
           tag + ": rerun must be identical");

    set_thread_budget(1);
    const ReducedCorpus serial = reduce(corpus, plan);
    set_thread_budget(4);
    const ReducedCorpus wide = reduce(corpus, plan);
    set_thread_budget(previous_budget);
    expect(same_corpus(serial.corpus, wide.corpus) && same_audit(serial.audit, wide.audit),
           tag + ": thread budget must not change the result");
    expect(same_corpus(first.corpus, serial.corpus), tag + ": budgeted run drifted");
  }
}

// --- 5. order-sensitive behaviour on a noisy corpus ----------------------------

void criterion_order_sensitivity() {
  SyntheticSpec main_spec;
  main_spec.seed = 501;
  main_spec.n_classes = 4;
  main_spec.docs_per_class = 48;
  main_spec.vocab_per_class = 5;
  main_spec.noise_rate = 0.15;
  auto reports = generate_synthetic_corpus(main_spec);

  // A handful of pure-noise reports assigned to the first developer: their
  // words span all classes, so the word cut empties them.
  SyntheticSpec tail_spec;
  tail_spec.seed = 777;
  tail_spec.n_classes = 1;
  tail_spec.docs_per_class = 8;
  tail_spec.vocab_per_class = 5;
  tail_spec.noise_rate = 1.0;
  for (auto report : generate_synthetic_corpus(tail_spec)) {
    report.id += 5000;
    report.opened_at += 5000;
    reports.push_back(report);
  }
  for (std::size_t i = 0; i < reports.size(); i += 9) {
    reports[i].duplicate_of = reports[(i + 3) % reports.size()].id;
  }

  const CorpusBuild build = build_corpus(reports, bundled_stop_words());
  expect(build.corpus.doc_count() == 200, "fixture must build 200 documents");

  ReductionPlan plan;
  plan.fs = FsAlgorithm::CH;
  plan.is = IsAlgorithm::ICF;
  plan.word_rate = 0.5;
  plan.bug_rate = 0.6;
  plan.seed = 11;

  plan.order = ReductionOrder::FsThenIs;
  const ReducedCorpus fs_first = reduce(build.corpus, plan);
  plan.order = ReductionOrder::IsThenFs;
  const ReducedCorpus is_first = reduce(build.corpus, plan);

  expect(fs_first.corpus.vocabulary != is_first.corpus.vocabulary,
         "the two orders must keep different vocabularies");
  expect(fs_first.audit.duplicate_reports_removed !=
             is_first.audit.duplicate_reports_removed,
         "the two orders must drop different duplicate counts (got " +
             std::to_string(fs_first.audit.duplicate_reports_removed) + " vs " +
             std::to_string(is_first.audit.duplicate_reports_removed) + ")");
  expect(!fs_first.audit.blank_reports.empty(),
         "word-cut-first must blank at least one report");
  expect(!is_first.audit.blank_reports.empty(),
         "instance-cut-first must still blank at least one report");
  expect(fs_first.audit.duplicate_reports_removed > 0 ||
             is_first.audit.duplicate_reports_removed > 0,
         "at least one order must remove a duplicate report");
}

// --- 6. accuracy survives the default reduction on separable data --------------

void nondecreasing(const std::vector<double>& accuracy, const std::string& what) {
  for (std::size_t k = 1; k < accuracy.size(); ++k) {
    expect(accuracy[k] + 1e-12 >= accuracy[k - 1], what + ": curve must not decrease");
  }
  for (double a : accuracy) {
    expect(a >= 0.0 && a <= 1.0 + 1e-12, what + ": accuracy out of range");
  }
}

void criterion_learning_sanity() {
  SyntheticSpec spec;
  spec.seed = 404;
  spec.n_classes = 4;
  spec.docs_per_class = 60;
  spec.vocab_per_class = 12;
  spec.noise_rate = 0.0;
  const CorpusBuild build = build_corpus(generate_synthetic_corpus(spec), bundled_stop_words());
  const SplitCorpus split = chronological_split(build.corpus, 0.8);

  const TriageModel origin = train_naive_bayes(split.train);
  const AccuracyCurve origin_curve = evaluate_curve(origin, split.test, 5);
  expect(origin_curve.accuracy.front() >= 0.95,
         "origin accuracy at k=1 fell to " + std::to_string(origin_curve.accuracy.front()));
  nondecreasing(origin_curve.accuracy, "origin");

  ReductionPlan plan;  // default rates and algorithms
  plan.seed = 3;
  const ReducedCorpus reduced = reduce(split.train, plan);
  expect(reduced.corpus.doc_count() < split.train.doc_count(),
         "default reduction must drop documents");
  expect(reduced.corpus.word_count() < split.train.word_count(),
         "default reduction must drop words");

  const TriageModel model = train_naive_bayes(reduced.corpus);
  const AccuracyCurve curve = evaluate_curve(model, split.test, 5);
  expect(curve.accuracy.front() >= 0.90,
         "reduced accuracy at k=1 fell to " + std::to_string(curve.accuracy.front()));
  nondecreasing(curve.accuracy, "reduced");
}

// --- 7. order prediction recovers a planted attribute --------------------------

void criterion_order_prediction() {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> wide(0.0, 1.0);
  std::uniform_real_distribution<double> low(0.05, 0.35);
  std::uniform_real_distribution<double> high(0.65, 0.95);
  const int planted = 2;

  Eigen::MatrixXd rows(200, kAttributeCount);
  std::vector<OrderLabel> labels(200);
  for (int r = 0; r < 200; ++r) {
    const bool second = r >= 100;
    labels[static_cast<std::size_t>(r)] =
        second ? OrderLabel::IsThenFs : OrderLabel::FsThenIs;
    for (int c = 0; c < kAttributeCount; ++c) rows(r, c) = wide(rng);
    rows(r, planted) = second ? high(rng) : low(rng);
  }
  NormalizationBounds bounds;
  bounds.min = Eigen::VectorXd::Zero(kAttributeCount);
  bounds.max = Eigen::VectorXd::Ones(kAttributeCount);

  for (OrderClassifierKind kind :
       {OrderClassifierKind::C45, OrderClassifierKind::AdaBoostResampling,
        OrderClassifierKind::AdaBoostReweighting}) {
    CvConfig config;
    config.kind = kind;
    config.folds = 10;
    config.rounds = 10;
    config.seed = 7;
    const CvResult cv = cross_validate(rows, labels, bounds, config);
    const std::string tag = std::string("classifier ") + to_string(kind);
    expect(cv.warnings.empty(), tag + ": unexpected fold warnings");
    expect(cv.metrics.accuracy >= 0.90,
           tag + ": cross-validated accuracy fell to " + std::to_string(cv.metrics.accuracy));
    expect(cv.fold_models.size() == 10, tag + ": expected one model per fold");

    if (kind == OrderClassifierKind::C45) {
      const auto analysis = top_node_analysis(collect_trees(cv.fold_models), 0, 1);
      expect(!analysis.empty(), tag + ": top node analysis came back empty");
      expect(analysis.front().attribute == planted,
             tag + ": planted attribute must dominate the root level");
      expect(analysis.front().frequency >= 8, tag + ": planted attribute frequency too low");
      expect(analysis.front().code == attribute_codes()[planted], tag + ": attribute code");
    }
  }
}

}  // namespace

int main() {
  run("f1 arithmetic matches the reference precision/recall rows",
      criterion_metric_arithmetic);
  run("unit splitting and cyclic window enumeration counts", criterion_counting_protocol);
  run("feature scores and exact wilcoxon match independent oracles",
      criterion_oracle_equivalence);
  run("reduction invariants hold and runs are deterministic",
      criterion_reduction_invariants);
  run("reduction order changes vocabulary, duplicates, and blanks",
      criterion_order_sensitivity);
  run("accuracy survives the default reduction on separable data",
      criterion_learning_sanity);
  run("order cross-validation recovers a planted attribute", criterion_order_prediction);
  run("total runtime stays inside the suite budget", [] {
    expect(g_total_ms < 240000,
           "criteria took " + std::to_string(g_total_ms) + " ms, budget is 240000 ms");
  });
  std::printf("acceptance: %d of 8 criteria failed (%lld ms)\n", g_failures, g_total_ms);
  return g_failures == 0 ? 0 : 1;
}
