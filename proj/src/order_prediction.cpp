#include "triage/order_prediction.hpp"

#include <algorithm>
#include <map>

#include "triage/rng.hpp"

namespace triage {

const char* to_string(OrderLabel label) {
  return label == OrderLabel::FsThenIs ? "FS->IS" : "IS->FS";
}

const char* to_string(OrderClassifierKind kind) {
  switch (kind) {
    case OrderClassifierKind::C45: return "c45";
    case OrderClassifierKind::AdaBoostResampling: return "ada_resampling";
    case OrderClassifierKind::AdaBoostReweighting: return "ada_reweighting";
  }
  return "?";
}

OrderClassifierKind order_classifier_from_string(const std::string& name) {
  if (name == "c45" || name == "c4.5" || name == "tree") {
    return OrderClassifierKind::C45;
  }
  if (name == "ada_resampling" || name == "resampling") {
    return OrderClassifierKind::AdaBoostResampling;
  }
  if (name == "ada_reweighting" || name == "reweighting") {
    return OrderClassifierKind::AdaBoostReweighting;
  }
  throw DataError("unknown order classifier: " + name);
}

OrderLabel label_reduction_order(const Corpus& dataset, const ReductionPlan& plan,
                                 ClassifierKind classifier, int k_max,
                                 const ClassifierParams& params) {
  const SplitCorpus split = chronological_split(dataset, 0.8);
  const OrderComparison cmp =
      compare_orders(split.train, split.test, plan, classifier, k_max, params);
  int fs_wins = 0, is_wins = 0;
  for (int w : cmp.winner) {
    if (w > 0) ++fs_wins;
    if (w < 0) ++is_wins;
  }
  return fs_wins > is_wins ? OrderLabel::FsThenIs : OrderLabel::IsThenFs;
}

OrderModel train_order_model(const Eigen::MatrixXd& normalized_rows,
                             const std::vector<OrderLabel>& labels,
                             const NormalizationBounds& bounds,
                             OrderClassifierKind kind, int rounds, std::uint64_t seed) {
  if (normalized_rows.rows() == 0 ||
      static_cast<std::size_t>(normalized_rows.rows()) != labels.size()) {
    throw DataError("train_order_model: rows and labels disagree");
  }
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = static_cast<int>(labels[i]);

  OrderModel model;
  model.kind = kind;
  model.bounds = bounds;
  if (kind == OrderClassifierKind::C45) {
    model.tree = DecisionTree::train(normalized_rows, y,
                                     Eigen::VectorXd::Ones(normalized_rows.rows()), 2);
  } else {
    AdaBoostParams params;
    params.variant = kind == OrderClassifierKind::AdaBoostResampling
                         ? BoostVariant::Resampling
                         : BoostVariant::Reweighting;
    params.rounds = rounds;
    params.seed = seed;
    model.ensemble = AdaBoostEnsemble::train(normalized_rows, y, 2, params);
  }
  return model;
}

OrderLabel OrderModel::predict_normalized(const Eigen::VectorXd& x) const {
  // majority()/predict() already break ties toward the higher class index,
  // which is IS->FS.
  if (tree) return static_cast<OrderLabel>(tree->predict(x));
  if (ensemble) return static_cast<OrderLabel>(ensemble->predict(x));
  throw DataError("order model: not trained");
}

OrderLabel OrderModel::predict(const DatasetAttributes& attrs) const {
  return predict_normalized(apply_bounds(attrs, bounds));
}

CvResult cross_validate(const Eigen::MatrixXd& rows, const std::vector<OrderLabel>& labels,
                        const NormalizationBounds& bounds, const CvConfig& config) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (n != labels.size()) throw DataError("cross_validate: rows and labels disagree");
  if (config.folds < 2) throw DataError("cross_validate: need at least two folds");
  if (static_cast<std::size_t>(config.folds) > n) {
    throw DataError("cross_validate: more folds than rows");
  }

  // Stratified assignment: shuffle each class, deal round-robin.
  std::vector<int> fold_of(n, 0);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<int>(labels[i]) == cls) members.push_back(i);
    }
    Rng rng = derive_rng(config.seed, static_cast<std::uint64_t>(cls));
    shuffle_indices(members, rng);
    for (std::size_t t = 0; t < members.size(); ++t) {
      fold_of[members[t]] = static_cast<int>(t % static_cast<std::size_t>(config.folds));
    }
  }

  CvResult out;
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(2, 2);
  for (int f = 0; f < config.folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < n; ++i) {
      (fold_of[i] == f ? test_idx : train_idx).push_back(i);
    }
    if (train_idx.empty() || test_idx.empty()) continue;

    Eigen::MatrixXd train_rows(static_cast<Eigen::Index>(train_idx.size()), rows.cols());
    std::vector<OrderLabel> train_labels(train_idx.size());
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      train_rows.row(static_cast<Eigen::Index>(i)) =
          rows.row(static_cast<Eigen::Index>(train_idx[i]));
      train_labels[i] = labels[train_idx[i]];
      seen[static_cast<int>(train_labels[i])] = true;
    }
    for (int cls = 0; cls < 2; ++cls) {
      if (!seen[cls]) {
        out.warnings.push_back("fold " + std::to_string(f) +
                               ": training split lacks class " +
                               to_string(static_cast<OrderLabel>(cls)));
      }
    }

    OrderModel model =
        train_order_model(train_rows, train_labels, bounds, config.kind, config.rounds,
                          derive_rng(config.seed, 1000 + static_cast<std::uint64_t>(f))());
    for (std::size_t i : test_idx) {
      const auto pred = model.predict_normalized(rows.row(static_cast<Eigen::Index>(i)));
      confusion(static_cast<int>(labels[i]), static_cast<int>(pred)) += 1.0;
    }
    out.fold_models.push_back(std::move(model));
  }
  out.metrics = class_metrics(confusion);
  return out;
}

namespace {

void walk(const TreeNode* node, int level, int max_level,
          std::map<std::pair<int, int>, int>& counts) {
  if (!node || node->is_leaf() || level > max_level) return;
  counts[{level, node->attribute}]++;
  walk(node->left.get(), level + 1, max_level, counts);
  walk(node->right.get(), level + 1, max_level, counts);
}

}  // namespace

std::vector<TopNodeRow> top_node_analysis(const std::vector<const DecisionTree*>& trees,
                                          int max_level, int min_frequency) {
  std::map<std::pair<int, int>, int> counts;
  for (const DecisionTree* tree : trees) {
    if (tree) walk(tree->root(), 0, max_level, counts);
  }
  std::vector<TopNodeRow> rows;
  for (const auto& [key, freq] : counts) {
    if (freq < min_frequency) continue;
    TopNodeRow row;
    row.level = key.first;
    row.attribute = key.second;
    row.frequency = freq;
    row.code = attribute_codes()[static_cast<std::size_t>(key.second)];
    row.name = attribute_names()[static_cast<std::size_t>(key.second)];
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const TopNodeRow& a, const TopNodeRow& b) {
    if (a.level != b.level) return a.level < b.level;
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.attribute < b.attribute;
  });
  return rows;
}

std::vector<const DecisionTree*> collect_trees(const std::vector<OrderModel>& models) {
  std::vector<const DecisionTree*> trees;
  for (const auto& model : models) {
    if (model.tree) {
      trees.push_back(&*model.tree);
    } else if (model.ensemble) {
      for (const auto& member : model.ensemble->members()) {
        trees.push_back(&member.tree);
      }
    }
  }
  return trees;
}

}  // namespace triage
