#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace triage {

// Row-major so per-document iteration is the cheap direction.
using TermMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseRow = Eigen::SparseVector<double>;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One record of a bug-tracker dump, one JSON Lines object on disk.
struct RawBugReport {
  std::int64_t id = 0;
  std::string summary;
  std::string description;
  std::string status;
  std::string resolution;
  std::string assigned_to;
  std::string reporter;
  std::string product;
  std::string component;
  std::string severity;
  std::string priority;
  std::int64_t opened_at = 0;
  std::optional<std::int64_t> duplicate_of;
};

struct ParseError {
  std::size_t line = 0;
  std::string message;
};

struct ParsedReports {
  std::vector<RawBugReport> reports;
  std::vector<ParseError> errors;
};

struct FilterPolicy {
  std::set<std::string> keep_resolutions = {"FIXED", "DUPLICATE"};
  int min_fixes_per_developer = 10;
};

struct DocMeta {
  std::int64_t bug_id = 0;
  std::string reporter;
  std::string product;
  std::string component;
  std::string severity;
  std::string priority;
  std::int64_t opened_at = 0;
  std::optional<std::int64_t> duplicate_of;
};

struct AuditEntry {
  std::int64_t bug_id = 0;
  std::string reason;
};

using StopWords = std::unordered_set<std::string>;

// Sparse vector-space view of a prepared bug data set. Rows are bug reports,
// columns are words, entries are raw term frequencies (counts, >= 1).
struct Corpus {
  std::vector<std::string> vocabulary;             // column -> word
  std::unordered_map<std::string, int> word_index; // word -> column
  TermMatrix matrix;                               // docs x words
  std::vector<int> labels;                         // per-doc class id
  std::vector<std::string> developers;             // class id -> developer
  std::vector<DocMeta> meta;

  std::size_t doc_count() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t word_count() const { return vocabulary.size(); }
  std::size_t class_count() const { return developers.size(); }

  // Classes that actually occur in `labels` (reduction can empty a class).
  std::vector<int> present_classes() const;

  void check_invariants() const;  // throws DataError on violation
};

// --- preparation ------------------------------------------------------------

ParsedReports parse_reports(std::istream& stream);
ParsedReports parse_reports_file(const std::string& path);

std::vector<RawBugReport> filter_reports(const std::vector<RawBugReport>& reports,
                                         const FilterPolicy& policy);

StopWords load_stop_words(std::istream& stream);
StopWords load_stop_words_file(const std::string& path);
const StopWords& bundled_stop_words();

// Surviving tokens in text order: split on non-letters, lowercase, drop
// single-letter shards and stop words. No stemming.
std::vector<std::string> tokenize_sequence(const std::string& text,
                                           const StopWords& stop_words);

// The same tokens as a word -> count multiset.
std::map<std::string, int> tokenize(const std::string& text,
                                    const StopWords& stop_words);

struct CorpusBuild {
  Corpus corpus;
  std::vector<AuditEntry> audit;  // reports excluded as empty after tokenizing
};

CorpusBuild build_corpus(const std::vector<RawBugReport>& reports,
                         const StopWords& stop_words);

struct SplitCorpus {
  Corpus train;
  Corpus test;  // shares the train vocabulary; unknown test words dropped
};

SplitCorpus chronological_split(const Corpus& corpus, double train_fraction = 0.8);

// --- row/column surgery shared by the reduction stages ----------------------

Corpus subset_rows(const Corpus& corpus, const std::vector<std::size_t>& rows);

struct ColumnSubset {
  Corpus corpus;
  std::vector<std::string> removed_words;
  std::vector<AuditEntry> blank_docs;  // removed because no word survived
};

ColumnSubset subset_columns(const Corpus& corpus, const std::vector<int>& keep_cols);

// --- synthetic data ----------------------------------------------------------

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int n_classes = 2;
  int docs_per_class = 10;
  int vocab_per_class = 5;
  double noise_rate = 0.0;
};

std::vector<RawBugReport> generate_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace triage
