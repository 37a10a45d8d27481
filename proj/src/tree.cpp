#include "triage/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "triage/corpus.hpp"
#include "triage/rng.hpp"

namespace triage {

int TreeNode::majority() const {
  int best = 0;
  for (Eigen::Index c = 1; c < class_weights.size(); ++c) {
    if (class_weights(c) >= class_weights(best)) best = static_cast<int>(c);
  }
  return best;
}

namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr double kGainEps = 1e-12;

double entropy_bits(const Eigen::VectorXd& weights, double total) {
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (Eigen::Index c = 0; c < weights.size(); ++c) {
    if (weights(c) > 0.0) {
      const double p = weights(c) / total;
      h -= p * std::log(p) / kLog2;
    }
  }
  return h;
}

// P(Z > z) = p solved by bisection; z for the default CF 0.25 is ~0.6745.
double normal_upper_quantile(double p) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2.0;
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2.0;
}

struct Builder {
  const Eigen::MatrixXd& rows;
  const std::vector<int>& labels;
  const Eigen::VectorXd& weights;
  int n_classes;
  const C45Params& params;

  Eigen::VectorXd class_totals(const std::vector<std::size_t>& idx) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_classes);
    for (std::size_t i : idx) w(labels[i]) += weights(static_cast<Eigen::Index>(i));
    return w;
  }

  std::unique_ptr<TreeNode> build(const std::vector<std::size_t>& idx) const {
    auto node = std::make_unique<TreeNode>();
    node->class_weights = class_totals(idx);
    const double total = node->class_weights.sum();

    int present = 0;
    for (Eigen::Index c = 0; c < n_classes; ++c) {
      if (node->class_weights(c) > 0.0) ++present;
    }
    if (present <= 1 || total < params.min_split_weight) return node;

    const double h_parent = entropy_bits(node->class_weights, total);
    int best_attr = -1;
    double best_threshold = 0.0;
    double best_ratio = 0.0;
    double best_gain = 0.0;

    std::vector<std::pair<double, std::size_t>> values(idx.size());
    for (int attr = 0; attr < rows.cols(); ++attr) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        values[i] = {rows(static_cast<Eigen::Index>(idx[i]), attr), idx[i]};
      }
      std::sort(values.begin(), values.end());

      Eigen::VectorXd left = Eigen::VectorXd::Zero(n_classes);
      Eigen::VectorXd right = node->class_weights;
      double left_total = 0.0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const auto row = values[i].second;
        const double w = weights(static_cast<Eigen::Index>(row));
        left(labels[row]) += w;
        right(labels[row]) -= w;
        left_total += w;
        if (values[i].first == values[i + 1].first) continue;
        const double right_total = total - left_total;
        if (left_total <= 0.0 || right_total <= 0.0) continue;

        const double h_split = (left_total / total) * entropy_bits(left, left_total) +
                               (right_total / total) * entropy_bits(right, right_total);
        const double gain = h_parent - h_split;
        if (gain <= kGainEps) continue;
        const double pl = left_total / total;
        const double pr = right_total / total;
        const double split_info = -(pl * std::log(pl) + pr * std::log(pr)) / kLog2;
        if (split_info <= 0.0) continue;
        const double ratio = gain / split_info;
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best_gain = gain;
          best_attr = attr;
          best_threshold = (values[i].first + values[i + 1].first) / 2.0;
        }
      }
    }

    if (best_attr < 0 || best_gain <= kGainEps) return node;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (rows(static_cast<Eigen::Index>(i), best_attr) <= best_threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }
    if (left_idx.empty() || right_idx.empty()) return node;

    node->attribute = best_attr;
    node->threshold = best_threshold;
    node->left = build(left_idx);
    node->right = build(right_idx);
    return node;
  }
};

double leaf_error_weight(const TreeNode& node) {
  return node.class_weights.sum() - node.class_weights.maxCoeff();
}

// Sum of pessimistic leaf errors below (and including) a node.
double subtree_errors(const TreeNode& node, double cf) {
  if (node.is_leaf()) {
    return pessimistic_errors(node.class_weights.sum(), leaf_error_weight(node), cf);
  }
  return subtree_errors(*node.left, cf) + subtree_errors(*node.right, cf);
}

void prune_node(TreeNode& node, double cf) {
  if (node.is_leaf()) return;
  prune_node(*node.left, cf);
  prune_node(*node.right, cf);
  const double as_leaf =
      pessimistic_errors(node.class_weights.sum(), leaf_error_weight(node), cf);
  if (as_leaf <= subtree_errors(node, cf) + 0.1) {
    node.attribute = -1;
    node.threshold = 0.0;
    node.left.reset();
    node.right.reset();
  }
}

}  // namespace

double pessimistic_errors(double total, double errors, double cf) {
  if (total <= 0.0) return 0.0;
  if (cf <= 0.0 || cf >= 1.0) throw std::invalid_argument("confidence must be in (0,1)");
  if (errors < 0.0) errors = 0.0;

  // Weka-style upper confidence bound for the binomial error count.
  if (errors < 1.0) {
    const double base = total * (1.0 - std::pow(cf, 1.0 / total));
    if (errors == 0.0) return base;
    const double at_one = pessimistic_errors(total, 1.0, cf);
    return base + errors * (at_one - base);
  }
  if (errors + 0.5 >= total) return errors + std::max(total - errors, 0.0);
  const double z = normal_upper_quantile(cf);
  const double f = (errors + 0.5) / total;
  const double z2 = z * z;
  const double r =
      (f + z2 / (2.0 * total) +
       z * std::sqrt(f / total - f * f / total + z2 / (4.0 * total * total))) /
      (1.0 + z2 / total);
  return errors + (r * total - errors);
}

DecisionTree DecisionTree::train(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                                 const Eigen::VectorXd& weights, int n_classes,
                                 const C45Params& params) {
  if (rows.rows() == 0) throw DataError("decision tree: no training rows");
  if (static_cast<std::size_t>(rows.rows()) != labels.size() ||
      rows.rows() != weights.size()) {
    throw DataError("decision tree: rows, labels, and weights sizes disagree");
  }
  if (n_classes < 1) throw DataError("decision tree: need at least one class");
  for (int c : labels) {
    if (c < 0 || c >= n_classes) throw DataError("decision tree: label out of range");
  }
  if ((weights.array() < 0.0).any()) {
    throw DataError("decision tree: negative instance weight");
  }

  DecisionTree tree;
  tree.n_classes_ = n_classes;
  std::vector<std::size_t> idx(static_cast<std::size_t>(rows.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  Builder builder{rows, labels, weights, n_classes, params};
  tree.root_ = builder.build(idx);
  if (params.prune) prune_node(*tree.root_, params.pruning_cf);
  return tree;
}

int DecisionTree::predict(const Eigen::VectorXd& x) const {
  if (!root_) throw DataError("decision tree: not trained");
  const TreeNode* node = root_.get();
  while (!node->is_leaf()) {
    node = x(node->attribute) <= node->threshold ? node->left.get() : node->right.get();
  }
  return node->majority();
}

Eigen::VectorXd DecisionTree::leaf_weights(const Eigen::VectorXd& x) const {
  if (!root_) throw DataError("decision tree: not trained");
  const TreeNode* node = root_.get();
  while (!node->is_leaf()) {
    node = x(node->attribute) <= node->threshold ? node->left.get() : node->right.get();
  }
  return node->class_weights;
}

void DecisionTree::reset(std::unique_ptr<TreeNode> root, int n_classes) {
  root_ = std::move(root);
  n_classes_ = n_classes;
}

namespace {

int count_nodes(const TreeNode* node) {
  if (!node) return 0;
  return 1 + count_nodes(node->left.get()) + count_nodes(node->right.get());
}

int count_leaves(const TreeNode* node) {
  if (!node) return 0;
  if (node->is_leaf()) return 1;
  return count_leaves(node->left.get()) + count_leaves(node->right.get());
}

}  // namespace

int DecisionTree::node_count() const { return count_nodes(root_.get()); }
int DecisionTree::leaf_count() const { return count_leaves(root_.get()); }

const char* to_string(BoostVariant variant) {
  switch (variant) {
    case BoostVariant::Resampling: return "resampling";
    case BoostVariant::Reweighting: return "reweighting";
  }
  return "?";
}

AdaBoostEnsemble AdaBoostEnsemble::train(const Eigen::MatrixXd& rows,
                                         const std::vector<int>& labels, int n_classes,
                                         const AdaBoostParams& params) {
  if (rows.rows() == 0) throw DataError("adaboost: no training rows");
  if (params.rounds < 1) throw DataError("adaboost: rounds must be >= 1");
  const auto n = static_cast<std::size_t>(rows.rows());
  const double dn = static_cast<double>(n);

  AdaBoostEnsemble ensemble;
  ensemble.n_classes_ = n_classes;
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(rows.rows(), 1.0 / dn);
  Rng rng = make_rng(params.seed);
  constexpr double kEpsFloor = 1e-9;

  for (int round = 0; round < params.rounds; ++round) {
    DecisionTree tree;
    if (params.variant == BoostVariant::Reweighting) {
      // Weights on the multiplicity scale: the distribution times n.
      tree = DecisionTree::train(rows, labels, dist * dn, n_classes, params.tree);
    } else {
      // Seeded bootstrap proportional to the distribution, unit weights.
      std::vector<double> cumulative(n);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist(static_cast<Eigen::Index>(i));
        cumulative[i] = acc;
      }
      std::vector<std::size_t> picks(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double u = rand_unit(rng) * acc;
        picks[j] = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        if (picks[j] >= n) picks[j] = n - 1;
      }
      std::sort(picks.begin(), picks.end());
      Eigen::MatrixXd sample(rows.rows(), rows.cols());
      std::vector<int> sample_labels(n);
      for (std::size_t j = 0; j < n; ++j) {
        sample.row(static_cast<Eigen::Index>(j)) = rows.row(static_cast<Eigen::Index>(picks[j]));
        sample_labels[j] = labels[picks[j]];
      }
      tree = DecisionTree::train(sample, sample_labels,
                                 Eigen::VectorXd::Ones(rows.rows()), n_classes,
                                 params.tree);
    }

    // Weighted error on the original rows.
    std::vector<char> correct(n, 0);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (tree.predict(rows.row(static_cast<Eigen::Index>(i)).transpose()) == labels[i]) {
        correct[i] = 1;
      } else {
        eps += dist(static_cast<Eigen::Index>(i));
      }
    }

    if (eps <= 0.0) {
      ensemble.members_.push_back(
          {std::move(tree), std::log((1.0 - kEpsFloor) / kEpsFloor)});
      break;
    }
    if (eps >= 0.5) {
      dist.setConstant(1.0 / dn);
      continue;
    }
    ensemble.members_.push_back({std::move(tree), std::log((1.0 - eps) / eps)});
    const double shrink = eps / (1.0 - eps);
    for (std::size_t i = 0; i < n; ++i) {
      if (correct[i]) dist(static_cast<Eigen::Index>(i)) *= shrink;
    }
    dist /= dist.sum();
  }

  if (ensemble.members_.empty()) {
    // Every round was discarded; fall back to a single unweighted tree.
    DecisionTree tree = DecisionTree::train(rows, labels,
                                            Eigen::VectorXd::Ones(rows.rows()),
                                            n_classes, params.tree);
    ensemble.members_.push_back({std::move(tree), 1.0});
  }
  return ensemble;
}

Eigen::VectorXd AdaBoostEnsemble::vote_scores(const Eigen::VectorXd& x) const {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes_);
  for (const auto& member : members_) {
    votes(member.tree.predict(x)) += member.vote;
  }
  return votes;
}

int AdaBoostEnsemble::predict(const Eigen::VectorXd& x) const {
  if (members_.empty()) throw DataError("adaboost: not trained");
  const Eigen::VectorXd votes = vote_scores(x);
  int best = 0;
  for (Eigen::Index c = 1; c < votes.size(); ++c) {
    if (votes(c) >= votes(best)) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace triage
