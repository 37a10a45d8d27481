#include "triage/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace triage {

const std::vector<std::string>& attribute_codes() {
  static const std::vector<std::string> codes = {
      "B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "B9", "B10",
      "D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8"};
  return codes;
}

const std::vector<std::string>& attribute_names() {
  static const std::vector<std::string> names = {
      "Number of bug reports",
      "Number of words",
      "Length of bug reports",
      "Unique words per bug report",
      "Sparseness of bug reports",
      "Entropy of severity",
      "Entropy of priority",
      "Entropy of product",
      "Entropy of component",
      "Entropy of words",
      "Number of developers",
      "Bug reports per developer",
      "Words per developer",
      "Number of reporters",
      "Bug reports per reporter",
      "Words per reporter",
      "Bug reports by top 10% reporters",
      "Similarity between developers and reporters"};
  return names;
}

Eigen::VectorXd DatasetAttributes::to_vector() const {
  Eigen::VectorXd v(kAttributeCount);
  v << b1_report_count, b2_word_count, b3_words_per_report, b4_unique_words_per_report,
      b5_sparseness, b6_severity_entropy, b7_priority_entropy, b8_product_entropy,
      b9_component_entropy, b10_word_entropy, d1_developer_count,
      d2_reports_per_developer, d3_words_per_developer, d4_reporter_count,
      d5_reports_per_reporter, d6_words_per_reporter, d7_top_reporter_share,
      d8_fixer_reporter_overlap;
  return v;
}

DatasetAttributes DatasetAttributes::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kAttributeCount) {
    throw DataError("attribute vector must have 18 entries");
  }
  DatasetAttributes a;
  a.b1_report_count = v(0);
  a.b2_word_count = v(1);
  a.b3_words_per_report = v(2);
  a.b4_unique_words_per_report = v(3);
  a.b5_sparseness = v(4);
  a.b6_severity_entropy = v(5);
  a.b7_priority_entropy = v(6);
  a.b8_product_entropy = v(7);
  a.b9_component_entropy = v(8);
  a.b10_word_entropy = v(9);
  a.d1_developer_count = v(10);
  a.d2_reports_per_developer = v(11);
  a.d3_words_per_developer = v(12);
  a.d4_reporter_count = v(13);
  a.d5_reports_per_reporter = v(14);
  a.d6_words_per_reporter = v(15);
  a.d7_top_reporter_share = v(16);
  a.d8_fixer_reporter_overlap = v(17);
  return a;
}

namespace {

constexpr double kLog2 = 0.6931471805599453;

double entropy_bits(const std::map<std::string, std::size_t>& counts, double total) {
  double h = 0.0;
  for (const auto& [key, count] : counts) {
    if (count > 0) {
      const double p = static_cast<double>(count) / total;
      h -= p * std::log(p) / kLog2;
    }
  }
  return h;
}

}  // namespace

DatasetAttributes extract_attributes(const Corpus& corpus) {
  const auto m = corpus.doc_count();
  const auto n = corpus.word_count();
  if (m == 0 || n == 0) throw DataError("extract_attributes: empty corpus");

  DatasetAttributes a;
  a.b1_report_count = static_cast<double>(m);
  a.b2_word_count = static_cast<double>(n);

  double total_tf = 0.0;
  std::size_t nnz = 0;
  Eigen::VectorXd word_tf = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < corpus.matrix.rows(); ++i) {
    for (TermMatrix::InnerIterator it(corpus.matrix, i); it; ++it) {
      total_tf += it.value();
      word_tf(it.col()) += it.value();
      ++nnz;
    }
  }
  a.b3_words_per_report = total_tf / static_cast<double>(m);
  a.b4_unique_words_per_report = static_cast<double>(nnz) / static_cast<double>(m);
  a.b5_sparseness =
      (static_cast<double>(m) * static_cast<double>(n) - static_cast<double>(nnz)) /
      (static_cast<double>(m) * static_cast<double>(n));

  std::map<std::string, std::size_t> severity, priority, product, component;
  std::map<std::string, std::size_t> per_reporter;
  for (const auto& meta : corpus.meta) {
    severity[meta.severity]++;
    priority[meta.priority]++;
    product[meta.product]++;
    component[meta.component]++;
    per_reporter[meta.reporter]++;
  }
  const double dm = static_cast<double>(m);
  a.b6_severity_entropy = entropy_bits(severity, dm);
  a.b7_priority_entropy = entropy_bits(priority, dm);
  a.b8_product_entropy = entropy_bits(product, dm);
  a.b9_component_entropy = entropy_bits(component, dm);

  double h_words = 0.0;
  for (Eigen::Index t = 0; t < word_tf.size(); ++t) {
    if (word_tf(t) > 0.0) {
      const double p = word_tf(t) / total_tf;
      h_words -= p * std::log(p) / kLog2;
    }
  }
  a.b10_word_entropy = h_words;

  const auto present = corpus.present_classes();
  a.d1_developer_count = static_cast<double>(present.size());
  a.d2_reports_per_developer = a.b1_report_count / a.d1_developer_count;
  a.d3_words_per_developer = total_tf / a.d1_developer_count;

  a.d4_reporter_count = static_cast<double>(per_reporter.size());
  a.d5_reports_per_reporter = a.b1_report_count / a.d4_reporter_count;
  a.d6_words_per_reporter = total_tf / a.d4_reporter_count;

  // Share of reports filed by the top ceil(10%) reporters; count ties keep
  // the lexicographically smaller reporter id.
  const auto top = static_cast<std::size_t>(
      std::ceil(0.1 * static_cast<double>(per_reporter.size()) - 1e-12));
  std::vector<std::pair<std::string, std::size_t>> ranked(per_reporter.begin(),
                                                          per_reporter.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::size_t top_reports = 0;
  for (std::size_t i = 0; i < top && i < ranked.size(); ++i) {
    top_reports += ranked[i].second;
  }
  a.d7_top_reporter_share = static_cast<double>(top_reports) / dm;

  std::set<std::string> fixers, reporters;
  for (int c : present) fixers.insert(corpus.developers[static_cast<std::size_t>(c)]);
  for (const auto& meta : corpus.meta) reporters.insert(meta.reporter);
  std::size_t common = 0;
  for (const auto& f : fixers) {
    if (reporters.count(f)) ++common;
  }
  const std::size_t unite = fixers.size() + reporters.size() - common;
  a.d8_fixer_reporter_overlap =
      unite == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unite);
  return a;
}

NormalizedAttributes normalize_attributes(const std::vector<DatasetAttributes>& rows) {
  if (rows.empty()) throw DataError("normalize_attributes: no rows");
  NormalizedAttributes out;
  out.rows.resize(static_cast<Eigen::Index>(rows.size()), kAttributeCount);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = rows[i].to_vector().transpose();
  }
  out.bounds.min = out.rows.colwise().minCoeff();
  out.bounds.max = out.rows.colwise().maxCoeff();
  for (Eigen::Index c = 0; c < kAttributeCount; ++c) {
    const double range = out.bounds.max(c) - out.bounds.min(c);
    for (Eigen::Index r = 0; r < out.rows.rows(); ++r) {
      out.rows(r, c) = range > 0.0 ? (out.rows(r, c) - out.bounds.min(c)) / range : 0.0;
    }
  }
  return out;
}

Eigen::VectorXd apply_bounds(const DatasetAttributes& attrs,
                             const NormalizationBounds& bounds) {
  if (bounds.min.size() != kAttributeCount || bounds.max.size() != kAttributeCount) {
    throw DataError("apply_bounds: bounds must cover 18 attributes");
  }
  Eigen::VectorXd v = attrs.to_vector();
  Eigen::VectorXd out(kAttributeCount);
  for (Eigen::Index c = 0; c < kAttributeCount; ++c) {
    const double range = bounds.max(c) - bounds.min(c);
    double x = range > 0.0 ? (v(c) - bounds.min(c)) / range : 0.0;
    out(c) = std::clamp(x, 0.0, 1.0);
  }
  return out;
}

std::vector<std::vector<RawBugReport>> split_bug_units(std::vector<RawBugReport> reports,
                                                       std::size_t unit_size) {
  if (unit_size == 0) throw DataError("split_bug_units: unit size must be >= 1");
  std::stable_sort(reports.begin(), reports.end(),
                   [](const RawBugReport& a, const RawBugReport& b) { return a.id < b.id; });
  std::vector<std::vector<RawBugReport>> units;
  for (std::size_t start = 0; start < reports.size(); start += unit_size) {
    const auto end = std::min(start + unit_size, reports.size());
    units.emplace_back(reports.begin() + static_cast<std::ptrdiff_t>(start),
                       reports.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return units;
}

std::vector<std::vector<RawBugReport>> enumerate_window_datasets(
    const std::vector<std::vector<RawBugReport>>& units, std::size_t max_window) {
  const auto u = units.size();
  if (max_window == 0 || max_window > u) {
    throw DataError("enumerate_window_datasets: window range exceeds unit count");
  }
  std::vector<std::vector<RawBugReport>> datasets;
  datasets.reserve(u * max_window);
  for (std::size_t w = 1; w <= max_window; ++w) {
    for (std::size_t start = 0; start < u; ++start) {
      std::vector<RawBugReport> dataset;
      for (std::size_t j = 0; j < w; ++j) {
        const auto& unit = units[(start + j) % u];
        dataset.insert(dataset.end(), unit.begin(), unit.end());
      }
      datasets.push_back(std::move(dataset));
    }
  }
  return datasets;
}

}  // namespace triage
