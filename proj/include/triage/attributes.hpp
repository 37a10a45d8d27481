#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

inline constexpr int kAttributeCount = 18;

// Short codes B1..B10, D1..D8 and their descriptions, in vector order.
const std::vector<std::string>& attribute_codes();
const std::vector<std::string>& attribute_names();

struct DatasetAttributes {
  // Bug report attributes
  double b1_report_count = 0;
  double b2_word_count = 0;
  double b3_words_per_report = 0;       // total term frequency / reports
  double b4_unique_words_per_report = 0;
  double b5_sparseness = 0;             // zero cells / (B1 * B2)
  double b6_severity_entropy = 0;
  double b7_priority_entropy = 0;
  double b8_product_entropy = 0;
  double b9_component_entropy = 0;
  double b10_word_entropy = 0;
  // Developer attributes
  double d1_developer_count = 0;
  double d2_reports_per_developer = 0;
  double d3_words_per_developer = 0;
  double d4_reporter_count = 0;
  double d5_reports_per_reporter = 0;
  double d6_words_per_reporter = 0;
  double d7_top_reporter_share = 0;     // reports by the top 10% of reporters
  double d8_fixer_reporter_overlap = 0; // Tanimoto of fixer and reporter sets

  Eigen::VectorXd to_vector() const;
  static DatasetAttributes from_vector(const Eigen::VectorXd& v);
};

DatasetAttributes extract_attributes(const Corpus& corpus);

struct NormalizationBounds {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

struct NormalizedAttributes {
  Eigen::MatrixXd rows;  // one dataset per row, values in [0,1]
  NormalizationBounds bounds;
};

// Min-max normalization per column; a constant column maps to 0.
NormalizedAttributes normalize_attributes(const std::vector<DatasetAttributes>& rows);

// Normalizes a fresh vector with stored bounds, clamping to [0,1].
Eigen::VectorXd apply_bounds(const DatasetAttributes& attrs,
                             const NormalizationBounds& bounds);

// Splits reports (ascending id) into consecutive units of `unit_size`;
// the last unit may be short.
std::vector<std::vector<RawBugReport>> split_bug_units(
    std::vector<RawBugReport> reports, std::size_t unit_size = 5000);

// All cyclic window datasets over the units for window = 1..max_window:
// dataset (w, s) concatenates units s, s+1, ..., s+w-1 modulo the unit count.
std::vector<std::vector<RawBugReport>> enumerate_window_datasets(
    const std::vector<std::vector<RawBugReport>>& units, std::size_t max_window);

}  // namespace triage
