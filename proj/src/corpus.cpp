#include "triage/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "triage/rng.hpp"
#include "triage/stopwords_data.hpp"

namespace triage {

using nlohmann::json;

std::vector<int> Corpus::present_classes() const {
  std::vector<char> seen(developers.size(), 0);
  for (int c : labels) seen[static_cast<std::size_t>(c)] = 1;
  std::vector<int> out;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c]) out.push_back(static_cast<int>(c));
  }
  return out;
}

void Corpus::check_invariants() const {
  const auto m = doc_count();
  if (labels.size() != m || meta.size() != m) {
    throw DataError("corpus: documents, labels, and meta sizes disagree");
  }
  if (static_cast<std::size_t>(matrix.cols()) != vocabulary.size() ||
      word_index.size() != vocabulary.size()) {
    throw DataError("corpus: vocabulary/matrix width mismatch");
  }
  for (std::size_t c = 0; c < vocabulary.size(); ++c) {
    auto it = word_index.find(vocabulary[c]);
    if (it == word_index.end() || it->second != static_cast<int>(c)) {
      throw DataError("corpus: word_index is not the inverse of vocabulary");
    }
  }
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (TermMatrix::InnerIterator it(matrix, k); it; ++it) {
      if (it.value() < 1.0) throw DataError("corpus: stored term frequency < 1");
    }
  }
  for (int c : labels) {
    if (c < 0 || static_cast<std::size_t>(c) >= developers.size()) {
      throw DataError("corpus: label out of range");
    }
  }
}

// --- parsing -----------------------------------------------------------------

namespace {

std::optional<std::string> field_string(const json& j, const char* key,
                                        bool required) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) return std::nullopt;
    return std::string{};
  }
  if (!it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<RawBugReport> parse_record(const json& j, std::string& error) {
  if (!j.is_object()) {
    error = "record is not an object";
    return std::nullopt;
  }
  RawBugReport r;
  auto id = j.find("id");
  if (id == j.end() || !id->is_number_integer() || id->get<std::int64_t>() <= 0) {
    error = "missing or non-positive id";
    return std::nullopt;
  }
  r.id = id->get<std::int64_t>();

  auto summary = j.find("summary");
  if (summary == j.end() || !summary->is_string()) {
    error = "summary absent";  // empty is fine, absent is not
    return std::nullopt;
  }
  r.summary = summary->get<std::string>();

  struct Slot {
    const char* key;
    std::string* dst;
    bool required_nonempty;
  };
  const Slot slots[] = {
      {"description", &r.description, false}, {"status", &r.status, false},
      {"resolution", &r.resolution, false},   {"assigned_to", &r.assigned_to, true},
      {"reporter", &r.reporter, true},        {"product", &r.product, false},
      {"component", &r.component, false},     {"severity", &r.severity, false},
      {"priority", &r.priority, false},
  };
  for (const auto& s : slots) {
    auto v = field_string(j, s.key, s.required_nonempty);
    if (!v || (s.required_nonempty && v->empty())) {
      error = std::string(s.key) + " missing or empty";
      return std::nullopt;
    }
    *s.dst = std::move(*v);
  }

  auto opened = j.find("opened_at");
  if (opened == j.end() || !opened->is_number_integer()) {
    error = "opened_at missing or not an integer";
    return std::nullopt;
  }
  r.opened_at = opened->get<std::int64_t>();

  auto dup = j.find("duplicate_of");
  if (dup != j.end() && !dup->is_null()) {
    if (!dup->is_number_integer()) {
      error = "duplicate_of not an integer";
      return std::nullopt;
    }
    r.duplicate_of = dup->get<std::int64_t>();
  }
  return r;
}

}  // namespace

ParsedReports parse_reports(std::istream& stream) {
  if (!stream) throw DataError("unreadable report stream");
  ParsedReports out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      out.errors.push_back({line_no, "invalid JSON"});
      continue;
    }
    std::string error;
    auto record = parse_record(j, error);
    if (!record) {
      out.errors.push_back({line_no, error});
      continue;
    }
    out.reports.push_back(std::move(*record));
  }
  if (stream.bad()) throw DataError("read failure on report stream");
  return out;
}

ParsedReports parse_reports_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report file: " + path);
  return parse_reports(in);
}

// --- filtering ---------------------------------------------------------------

std::vector<RawBugReport> filter_reports(const std::vector<RawBugReport>& reports,
                                         const FilterPolicy& policy) {
  if (policy.min_fixes_per_developer < 0) {
    throw DataError("min_fixes_per_developer must be >= 0");
  }
  // Pass 1: resolution filter.
  std::vector<RawBugReport> kept;
  kept.reserve(reports.size());
  for (const auto& r : reports) {
    if (policy.keep_resolutions.count(r.resolution)) kept.push_back(r);
  }
  // Pass 2: drop developers with fewer than the minimum kept reports.
  std::unordered_map<std::string, int> per_dev;
  for (const auto& r : kept) per_dev[r.assigned_to]++;
  std::vector<RawBugReport> out;
  out.reserve(kept.size());
  for (auto& r : kept) {
    if (per_dev[r.assigned_to] >= policy.min_fixes_per_developer) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

// --- stop words & tokenization ----------------------------------------------

StopWords load_stop_words(std::istream& stream) {
  StopWords words;
  std::string line;
  while (std::getline(stream, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string word;
    for (char ch : line) {
      if (!std::isspace(static_cast<unsigned char>(ch))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      }
    }
    if (!word.empty()) words.insert(std::move(word));
  }
  return words;
}

StopWords load_stop_words_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stop-word list: " + path);
  return load_stop_words(in);
}

const StopWords& bundled_stop_words() {
  static const StopWords words = [] {
    std::istringstream in(kSmartStopWords);
    return load_stop_words(in);
  }();
  return words;
}

std::vector<std::string> tokenize_sequence(const std::string& text,
                                           const StopWords& stop_words) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !stop_words.count(current)) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (char ch : text) {
    unsigned char u = static_cast<unsigned char>(ch);
    if (std::isalpha(u) && u < 0x80) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::map<std::string, int> tokenize(const std::string& text,
                                    const StopWords& stop_words) {
  std::map<std::string, int> counts;
  for (const auto& tok : tokenize_sequence(text, stop_words)) counts[tok]++;
  return counts;
}

// --- corpus construction -----------------------------------------------------

CorpusBuild build_corpus(const std::vector<RawBugReport>& reports,
                         const StopWords& stop_words) {
  CorpusBuild out;
  Corpus& corpus = out.corpus;
  std::unordered_map<std::string, int> dev_index;
  std::vector<Eigen::Triplet<double>> cells;
  std::vector<std::unordered_map<int, int>> rows;

  for (const auto& r : reports) {
    auto tokens = tokenize_sequence(r.summary + " " + r.description, stop_words);
    if (tokens.empty()) {
      out.audit.push_back({r.id, "blank_after_tokenization"});
      continue;
    }
    std::unordered_map<int, int> row;
    for (const auto& tok : tokens) {
      auto [it, inserted] =
          corpus.word_index.try_emplace(tok, static_cast<int>(corpus.vocabulary.size()));
      if (inserted) corpus.vocabulary.push_back(tok);
      row[it->second]++;
    }
    auto [dev_it, dev_new] =
        dev_index.try_emplace(r.assigned_to, static_cast<int>(corpus.developers.size()));
    if (dev_new) corpus.developers.push_back(r.assigned_to);
    corpus.labels.push_back(dev_it->second);
    corpus.meta.push_back({r.id, r.reporter, r.product, r.component, r.severity,
                           r.priority, r.opened_at, r.duplicate_of});
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw DataError("empty corpus");

  corpus.matrix.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(corpus.vocabulary.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [col, tf] : rows[i]) {
      cells.emplace_back(static_cast<int>(i), col, static_cast<double>(tf));
    }
  }
  corpus.matrix.setFromTriplets(cells.begin(), cells.end());
  corpus.matrix.makeCompressed();
  return out;
}

// --- splits & surgery --------------------------------------------------------

Corpus subset_rows(const Corpus& corpus, const std::vector<std::size_t>& keep) {
  Corpus out;
  out.vocabulary = corpus.vocabulary;
  out.word_index = corpus.word_index;
  out.developers = corpus.developers;
  out.matrix.resize(static_cast<Eigen::Index>(keep.size()), corpus.matrix.cols());
  std::vector<Eigen::Triplet<double>> cells;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(keep[i]);
    for (TermMatrix::InnerIterator it(corpus.matrix, src); it; ++it) {
      cells.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
    }
    out.labels.push_back(corpus.labels[keep[i]]);
    out.meta.push_back(corpus.meta[keep[i]]);
  }
  out.matrix.setFromTriplets(cells.begin(), cells.end());
  out.matrix.makeCompressed();
  return out;
}

ColumnSubset subset_columns(const Corpus& corpus, const std::vector<int>& keep_cols) {
  ColumnSubset out;
  std::vector<int> col_map(corpus.word_count(), -1);
  for (std::size_t i = 0; i < keep_cols.size(); ++i) {
    col_map[static_cast<std::size_t>(keep_cols[i])] = static_cast<int>(i);
  }
  Corpus& reduced = out.corpus;
  for (int col : keep_cols) {
    const auto& word = corpus.vocabulary[static_cast<std::size_t>(col)];
    reduced.word_index.emplace(word, static_cast<int>(reduced.vocabulary.size()));
    reduced.vocabulary.push_back(word);
  }
  for (std::size_t c = 0; c < corpus.vocabulary.size(); ++c) {
    if (col_map[c] < 0) out.removed_words.push_back(corpus.vocabulary[c]);
  }
  reduced.developers = corpus.developers;

  std::vector<Eigen::Triplet<double>> cells;
  std::size_t next_row = 0;
  for (Eigen::Index i = 0; i < corpus.matrix.rows(); ++i) {
    bool any = false;
    for (TermMatrix::InnerIterator it(corpus.matrix, i); it; ++it) {
      int mapped = col_map[static_cast<std::size_t>(it.col())];
      if (mapped >= 0) {
        cells.emplace_back(static_cast<int>(next_row), mapped, it.value());
        any = true;
      }
    }
    const auto idx = static_cast<std::size_t>(i);
    if (any) {
      reduced.labels.push_back(corpus.labels[idx]);
      reduced.meta.push_back(corpus.meta[idx]);
      ++next_row;
    } else {
      // Cut every cell from this row's triplets again: none were added.
      out.blank_docs.push_back({corpus.meta[idx].bug_id, "blank_after_feature_selection"});
    }
  }
  reduced.matrix.resize(static_cast<Eigen::Index>(next_row),
                        static_cast<Eigen::Index>(keep_cols.size()));
  reduced.matrix.setFromTriplets(cells.begin(), cells.end());
  reduced.matrix.makeCompressed();
  return out;
}

SplitCorpus chronological_split(const Corpus& corpus, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train_fraction must lie in (0,1)");
  }
  const std::size_t m = corpus.doc_count();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.meta[a].opened_at < corpus.meta[b].opened_at;
  });
  const auto train_count =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(m)));
  std::vector<std::size_t> train_rows(order.begin(), order.begin() + train_count);
  std::vector<std::size_t> test_rows(order.begin() + train_count, order.end());

  Corpus train_full = subset_rows(corpus, train_rows);
  // Train vocabulary: the parent columns that occur in the training documents,
  // in their original column order.
  std::vector<char> used(corpus.word_count(), 0);
  for (Eigen::Index i = 0; i < train_full.matrix.rows(); ++i) {
    for (TermMatrix::InnerIterator it(train_full.matrix, i); it; ++it) {
      used[static_cast<std::size_t>(it.col())] = 1;
    }
  }
  std::vector<int> keep_cols;
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (used[c]) keep_cols.push_back(static_cast<int>(c));
  }

  SplitCorpus out;
  out.train = subset_columns(train_full, keep_cols).corpus;

  // Test documents keep only train-vocabulary words, but are never dropped:
  // a test report with no known words still counts against accuracy.
  Corpus& test = out.test;
  test.vocabulary = out.train.vocabulary;
  test.word_index = out.train.word_index;
  test.developers = corpus.developers;
  std::vector<int> col_map(corpus.word_count(), -1);
  for (std::size_t i = 0; i < keep_cols.size(); ++i) {
    col_map[static_cast<std::size_t>(keep_cols[i])] = static_cast<int>(i);
  }
  std::vector<Eigen::Triplet<double>> cells;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(test_rows[i]);
    for (TermMatrix::InnerIterator it(corpus.matrix, src); it; ++it) {
      int mapped = col_map[static_cast<std::size_t>(it.col())];
      if (mapped >= 0) cells.emplace_back(static_cast<int>(i), mapped, it.value());
    }
    test.labels.push_back(corpus.labels[test_rows[i]]);
    test.meta.push_back(corpus.meta[test_rows[i]]);
  }
  test.matrix.resize(static_cast<Eigen::Index>(test_rows.size()),
                     static_cast<Eigen::Index>(keep_cols.size()));
  test.matrix.setFromTriplets(cells.begin(), cells.end());
  test.matrix.makeCompressed();
  return out;
}

// --- synthetic corpora -------------------------------------------------------

namespace {

// Deterministic pure-letter word, at least `width` letters, never a stop word.
std::string letter_code(std::size_t value, int width) {
  std::string s;
  for (int i = 0; i < width || value > 0; ++i) {
    s.push_back(static_cast<char>('a' + value % 26));
    value /= 26;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

const char* kSeverities[] = {"critical", "major", "normal", "minor", "trivial"};
const char* kPriorities[] = {"P1", "P2", "P3", "P4", "P5"};
const char* kProducts[] = {"core", "ui", "net"};
const char* kComponents[] = {"engine", "widgets", "io", "docs"};

}  // namespace

std::vector<RawBugReport> generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.n_classes < 1 || spec.vocab_per_class < 1 || spec.docs_per_class < 0 ||
      spec.noise_rate < 0.0 || spec.noise_rate > 1.0) {
    throw DataError("invalid synthetic corpus parameters");
  }
  Rng rng = make_rng(spec.seed);
  const int noise_vocab = spec.vocab_per_class;
  const int tokens_per_doc = 8;
  const std::size_t reporter_pool = std::max<std::size_t>(3, spec.n_classes);

  std::vector<RawBugReport> reports;
  const std::size_t total =
      static_cast<std::size_t>(spec.n_classes) * static_cast<std::size_t>(spec.docs_per_class);
  reports.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const int cls = static_cast<int>(i % static_cast<std::size_t>(spec.n_classes));
    std::vector<std::string> tokens;
    for (int t = 0; t < tokens_per_doc; ++t) {
      if (spec.noise_rate > 0.0 && rand_unit(rng) < spec.noise_rate) {
        tokens.push_back("zng" + letter_code(rand_index(rng, noise_vocab), 3));
      } else {
        std::size_t word = rand_index(rng, static_cast<std::size_t>(spec.vocab_per_class));
        tokens.push_back("sig" + letter_code(static_cast<std::size_t>(cls), 2) +
                         letter_code(word, 3));
      }
    }
    RawBugReport r;
    r.id = static_cast<std::int64_t>(i) + 1;
    r.summary = tokens[0] + " " + tokens[1] + " " + tokens[2];
    std::string desc;
    for (int t = 3; t < tokens_per_doc; ++t) {
      if (!desc.empty()) desc += " ";
      desc += tokens[static_cast<std::size_t>(t)];
    }
    r.description = desc;
    r.status = "RESOLVED";
    r.resolution = "FIXED";
    r.assigned_to = "dev" + letter_code(static_cast<std::size_t>(cls), 2);
    r.reporter = "rep" + letter_code(rand_index(rng, reporter_pool), 2);
    r.product = kProducts[rand_index(rng, std::size(kProducts))];
    r.component = kComponents[rand_index(rng, std::size(kComponents))];
    r.severity = kSeverities[rand_index(rng, std::size(kSeverities))];
    r.priority = kPriorities[rand_index(rng, std::size(kPriorities))];
    r.opened_at = 1500000000LL + static_cast<std::int64_t>(i) * 3600;
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace triage
