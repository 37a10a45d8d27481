#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

namespace triage {

struct C45Params {
  bool prune = true;
  double pruning_cf = 0.25;      // pessimistic-error confidence
  double min_split_weight = 2.0; // stop when total node weight drops below
};

struct TreeNode {
  // Internal node: attribute >= 0, left covers value <= threshold.
  int attribute = -1;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  // Every node carries its weighted class distribution; leaves predict from it.
  Eigen::VectorXd class_weights;

  bool is_leaf() const { return attribute < 0; }
  int majority() const;  // ties toward the higher class index
};

// C4.5-style binary decision tree: gain-ratio splits at midpoints between
// adjacent attribute values, pessimistic-error pruning. Instance weights are
// multiplicities: a weight-2 row behaves exactly like a duplicated row.
class DecisionTree {
 public:
  static DecisionTree train(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                            const Eigen::VectorXd& weights, int n_classes,
                            const C45Params& params = {});

  int predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd leaf_weights(const Eigen::VectorXd& x) const;

  const TreeNode* root() const { return root_.get(); }
  TreeNode* mutable_root() { return root_.get(); }
  void reset(std::unique_ptr<TreeNode> root, int n_classes);
  int class_count() const { return n_classes_; }
  int node_count() const;
  int leaf_count() const;

 private:
  std::unique_ptr<TreeNode> root_;
  int n_classes_ = 0;
};

// Upper confidence bound on the error count of a leaf holding `total`
// weighted instances of which `errors` are misclassified (CF = 0.25 scheme).
double pessimistic_errors(double total, double errors, double cf);

enum class BoostVariant { Resampling, Reweighting };

const char* to_string(BoostVariant variant);

struct AdaBoostParams {
  BoostVariant variant = BoostVariant::Reweighting;
  int rounds = 10;
  std::uint64_t seed = 0;
  C45Params tree;
};

class AdaBoostEnsemble {
 public:
  struct Member {
    DecisionTree tree;
    double vote = 0.0;
  };

  static AdaBoostEnsemble train(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                                int n_classes, const AdaBoostParams& params = {});

  int predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd vote_scores(const Eigen::VectorXd& x) const;

  const std::vector<Member>& members() const { return members_; }
  std::vector<Member>& mutable_members() { return members_; }
  int class_count() const { return n_classes_; }
  void set_class_count(int n) { n_classes_ = n; }

 private:
  std::vector<Member> members_;
  int n_classes_ = 0;
};

}  // namespace triage
