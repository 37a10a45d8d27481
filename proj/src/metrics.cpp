#include "triage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace triage {

double accuracy_at_k(const std::vector<std::vector<std::string>>& ranked,
                     const std::vector<std::string>& truths, int k) {
  if (ranked.empty() || ranked.size() != truths.size()) {
    throw DataError("accuracy_at_k: empty or mismatched test set");
  }
  if (k < 1) throw DataError("accuracy_at_k: k must be >= 1");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& list = ranked[i];
    const auto depth = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < depth; ++j) {
      if (list[j] == truths[i]) {
        ++correct;
        break;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ranked.size());
}

double loss_k(double origin_accuracy, double reduced_accuracy) {
  if (!(origin_accuracy > 0.0)) {
    throw DataError("loss_k: origin accuracy must be positive");
  }
  return (origin_accuracy - reduced_accuracy) / origin_accuracy;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  if (denom <= 0.0) return 0.0;
  return 2.0 * precision * recall / denom;
}

ClassMetrics class_metrics(const Eigen::MatrixXd& confusion) {
  if (confusion.rows() != confusion.cols() || confusion.rows() == 0) {
    throw DataError("class_metrics: confusion matrix must be square and non-empty");
  }
  if ((confusion.array() < 0.0).any()) {
    throw DataError("class_metrics: negative confusion counts");
  }
  ClassMetrics out;
  out.confusion = confusion;
  const auto n = confusion.rows();
  const double total = confusion.sum();
  double diag = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double col = confusion.col(c).sum();
    const double row = confusion.row(c).sum();
    const double hit = confusion(c, c);
    diag += hit;
    out.precision.push_back(col > 0.0 ? hit / col : 0.0);
    out.recall.push_back(row > 0.0 ? hit / row : 0.0);
    out.f1.push_back(f1_score(out.precision.back(), out.recall.back()));
  }
  out.accuracy = total > 0.0 ? diag / total : 0.0;
  return out;
}

namespace {

double normal_sf(double z) {  // P(Z > z)
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    bool two_sided) {
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    const double d = a - b;
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw DataError("wilcoxon: degenerate sample, all differences zero");

  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(diffs[a]) < std::fabs(diffs[b]);
  });

  // Average ranks across ties of |d|.
  std::vector<double> rank(n, 0.0);
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]])) {
      ++j;
    }
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }

  double w_plus = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (diffs[k] > 0.0) w_plus += rank[k];
  }
  const double total_rank = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  const double w_minus = total_rank - w_plus;
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult out;
  out.statistic = w;
  out.n_used = n;

  if (n <= 12) {
    out.exact = true;
    // Enumerate all sign assignments; ranks are fixed by |d|.
    std::vector<double> ranks_sorted(n);
    for (std::size_t k = 0; k < n; ++k) ranks_sorted[k] = rank[k];
    const std::uint64_t combos = 1ULL << n;
    std::uint64_t hits_two = 0;
    std::uint64_t hits_low = 0;
    std::uint64_t hits_high = 0;
    const double eps = 1e-9;
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
      double s_plus = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask & (1ULL << k)) s_plus += ranks_sorted[k];
      }
      const double s_min = std::min(s_plus, total_rank - s_plus);
      if (s_min <= w + eps) ++hits_two;
      if (s_plus <= w_plus + eps) ++hits_low;
      if (s_plus >= w_plus - eps) ++hits_high;
    }
    if (two_sided) {
      out.p_value = static_cast<double>(hits_two) / static_cast<double>(combos);
    } else {
      out.p_value = static_cast<double>(std::min(hits_low, hits_high)) /
                    static_cast<double>(combos);
    }
    return out;
  }

  const double dn = static_cast<double>(n);
  const double mean = total_rank / 2.0;
  double tie_term = 0.0;
  for (std::size_t t : tie_sizes) {
    const double dt = static_cast<double>(t);
    tie_term += dt * dt * dt - dt;
  }
  const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) throw DataError("wilcoxon: zero variance after tie correction");
  const double dev = std::max(std::fabs(w_plus - mean) - 0.5, 0.0);
  const double z = dev / std::sqrt(var);
  const double tail = normal_sf(z);
  out.p_value = std::min(two_sided ? 2.0 * tail : tail, 1.0);
  return out;
}

Corpus top_s_developer_subset(const Corpus& corpus, int s) {
  if (s < 2) throw DataError("top_s_developer_subset: s must be >= 2");
  std::map<int, std::size_t> counts;
  for (int c : corpus.labels) counts[c]++;
  if (static_cast<std::size_t>(s) >= counts.size()) return corpus;

  std::vector<std::pair<int, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return corpus.developers[static_cast<std::size_t>(a.first)] <
           corpus.developers[static_cast<std::size_t>(b.first)];
  });
  std::vector<char> keep_class(corpus.developers.size(), 0);
  for (int i = 0; i < s; ++i) {
    keep_class[static_cast<std::size_t>(ranked[static_cast<std::size_t>(i)].first)] = 1;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < corpus.labels.size(); ++i) {
    if (keep_class[static_cast<std::size_t>(corpus.labels[i])]) rows.push_back(i);
  }
  return subset_rows(corpus, rows);
}

}  // namespace triage
