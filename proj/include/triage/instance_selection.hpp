#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

enum class IsAlgorithm { ICF, LVQ, DROP, POP };

const char* to_string(IsAlgorithm algorithm);
IsAlgorithm is_from_string(const std::string& name);

struct RemovalRecord {
  std::int64_t bug_id = 0;
  std::string removed_by;  // wilson_edit | icf | drop | pop | lvq
  int iteration = 0;
};

struct SelectionResult {
  std::vector<std::size_t> kept;  // row indices, ascending
  std::vector<RemovalRecord> removals;
  bool hit_target = true;  // achieved count <= target
};

struct LvqParams {
  double initial_rate = 0.3;
  int passes = 10;
  std::uint64_t seed = 0;
};

// Cosine-distance neighbor queries over corpus rows. Distances are
// 1 - cosine similarity; two zero rows are at distance 0, a zero row is at
// distance 1 from any non-zero row. Ties prefer the smaller row index.
class NeighborIndex {
 public:
  explicit NeighborIndex(const TermMatrix& matrix);

  std::size_t size() const { return norms_.size(); }
  double distance(std::size_t a, std::size_t b) const;

  // k nearest alive rows to `query`, excluding `query` itself.
  std::vector<std::size_t> nearest(std::size_t query, int k,
                                   const std::vector<char>& alive) const;

 private:
  const TermMatrix* matrix_;
  std::vector<double> norms_;
  Eigen::MatrixXd cache_;  // full pairwise distances when small enough
  bool cached_ = false;
};

// All four selectors return ascending kept indices and an audit trail.
// A target of at least the corpus size is an identity pass.
SelectionResult select_icf(const Corpus& corpus, std::size_t target);
SelectionResult select_drop(const Corpus& corpus, std::size_t target);
SelectionResult select_pop(const Corpus& corpus, std::size_t target);
SelectionResult select_lvq(const Corpus& corpus, std::size_t target,
                           const LvqParams& params = {});
SelectionResult select_instances(const Corpus& corpus, IsAlgorithm algorithm,
                                 std::size_t target, const LvqParams& lvq = {});

}  // namespace triage
