#include "triage/instance_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "triage/parallel.hpp"
#include "triage/rng.hpp"

namespace triage {

const char* to_string(IsAlgorithm algorithm) {
  switch (algorithm) {
    case IsAlgorithm::ICF: return "icf";
    case IsAlgorithm::LVQ: return "lvq";
    case IsAlgorithm::DROP: return "drop";
    case IsAlgorithm::POP: return "pop";
  }
  return "?";
}

IsAlgorithm is_from_string(const std::string& name) {
  if (name == "icf") return IsAlgorithm::ICF;
  if (name == "lvq" || name == "lvq1") return IsAlgorithm::LVQ;
  if (name == "drop" || name == "drop3") return IsAlgorithm::DROP;
  if (name == "pop") return IsAlgorithm::POP;
  throw DataError("unknown instance selection algorithm: " + name);
}

namespace {

constexpr std::size_t kCacheLimit = 4096;
constexpr int kEditNeighbors = 3;

double row_norm(const TermMatrix& m, Eigen::Index i) {
  double sq = 0.0;
  for (TermMatrix::InnerIterator it(m, i); it; ++it) sq += it.value() * it.value();
  return std::sqrt(sq);
}

double row_dot(const TermMatrix& m, Eigen::Index a, Eigen::Index b) {
  double dot = 0.0;
  TermMatrix::InnerIterator ia(m, a), ib(m, b);
  while (ia && ib) {
    if (ia.col() == ib.col()) {
      dot += ia.value() * ib.value();
      ++ia;
      ++ib;
    } else if (ia.col() < ib.col()) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return dot;
}

}  // namespace

NeighborIndex::NeighborIndex(const TermMatrix& matrix) : matrix_(&matrix) {
  const auto m = static_cast<std::size_t>(matrix.rows());
  norms_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    norms_[i] = row_norm(matrix, static_cast<Eigen::Index>(i));
  }
  if (m <= kCacheLimit) {
    cache_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    parallel_for(m, [&](std::size_t i) {
      cache_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        double d;
        if (norms_[i] == 0.0 && norms_[j] == 0.0) {
          d = 0.0;
        } else if (norms_[i] == 0.0 || norms_[j] == 0.0) {
          d = 1.0;
        } else {
          const double dot = row_dot(*matrix_, static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(j));
          d = std::max(0.0, 1.0 - dot / (norms_[i] * norms_[j]));
        }
        cache_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      }
    });
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        cache_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cache_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      }
    }
    cached_ = true;
  }
}

double NeighborIndex::distance(std::size_t a, std::size_t b) const {
  if (cached_) {
    return cache_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  if (a == b) return 0.0;
  if (norms_[a] == 0.0 && norms_[b] == 0.0) return 0.0;
  if (norms_[a] == 0.0 || norms_[b] == 0.0) return 1.0;
  const double dot =
      row_dot(*matrix_, static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return std::max(0.0, 1.0 - dot / (norms_[a] * norms_[b]));
}

std::vector<std::size_t> NeighborIndex::nearest(std::size_t query, int k,
                                                const std::vector<char>& alive) const {
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < alive.size(); ++j) {
    if (alive[j] && j != query) candidates.push_back(j);
  }
  const auto depth = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(depth),
                    candidates.end(), [&](std::size_t a, std::size_t b) {
                      const double da = distance(query, a);
                      const double db = distance(query, b);
                      if (da != db) return da < db;
                      return a < b;
                    });
  candidates.resize(depth);
  return candidates;
}

namespace {

// Majority label among the given rows; ties prefer the smaller class id.
int vote(const std::vector<std::size_t>& rows, const std::vector<int>& labels) {
  std::map<int, int> counts;
  for (std::size_t r : rows) counts[labels[r]]++;
  int best = -1, best_count = 0;
  for (const auto& [cls, count] : counts) {
    if (count > best_count) {
      best = cls;
      best_count = count;
    }
  }
  return best;
}

std::size_t alive_count(const std::vector<char>& alive) {
  return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), char(1)));
}

// One pass of Wilson editing: decisions on the entry snapshot, applied at
// once. Instances whose 3-NN vote disagrees with their own label go.
void wilson_edit(const NeighborIndex& index, const Corpus& corpus,
                 std::vector<char>& alive, std::vector<RemovalRecord>& removals) {
  const auto m = alive.size();
  std::vector<char> remove(m, 0);
  parallel_for(m, [&](std::size_t i) {
    if (!alive[i]) return;
    const auto nn = index.nearest(i, kEditNeighbors, alive);
    if (nn.empty()) return;
    if (vote(nn, corpus.labels) != corpus.labels[i]) remove[i] = 1;
  });
  for (std::size_t i = 0; i < m; ++i) {
    if (remove[i]) {
      alive[i] = 0;
      removals.push_back({corpus.meta[i].bug_id, "wilson_edit", 0});
    }
  }
}

SelectionResult identity_result(const Corpus& corpus) {
  SelectionResult out;
  out.kept.resize(corpus.doc_count());
  std::iota(out.kept.begin(), out.kept.end(), 0);
  out.hit_target = true;
  return out;
}

SelectionResult finish(const Corpus& corpus, const std::vector<char>& alive,
                       std::vector<RemovalRecord> removals, std::size_t target) {
  SelectionResult out;
  for (std::size_t i = 0; i < alive.size(); ++i) {
    if (alive[i]) out.kept.push_back(i);
  }
  out.removals = std::move(removals);
  out.hit_target = out.kept.size() <= target;
  return out;
}

void check_target(const Corpus& corpus, std::size_t target) {
  if (corpus.doc_count() == 0) throw DataError("instance selection: empty corpus");
  if (target == 0) throw DataError("instance selection: target must be >= 1");
}

}  // namespace

SelectionResult select_icf(const Corpus& corpus, std::size_t target) {
  check_target(corpus, target);
  const auto m = corpus.doc_count();
  if (target >= m) return identity_result(corpus);

  NeighborIndex index(corpus.matrix);
  std::vector<char> alive(m, 1);
  std::vector<RemovalRecord> removals;
  wilson_edit(index, corpus, alive, removals);

  int iteration = 0;
  while (alive_count(alive) > target) {
    ++iteration;
    // Reachable and coverage sets against this iteration's snapshot.
    std::vector<double> enemy(m, std::numeric_limits<double>::infinity());
    parallel_for(m, [&](std::size_t i) {
      if (!alive[i]) return;
      for (std::size_t j = 0; j < m; ++j) {
        if (alive[j] && corpus.labels[j] != corpus.labels[i]) {
          enemy[i] = std::min(enemy[i], index.distance(i, j));
        }
      }
    });
    std::vector<std::size_t> reachable_size(m, 0);
    std::vector<std::vector<std::size_t>> reachable(m);
    parallel_for(m, [&](std::size_t i) {
      if (!alive[i]) return;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i && alive[j] && corpus.labels[j] == corpus.labels[i] &&
            index.distance(i, j) < enemy[i]) {
          reachable[i].push_back(j);
        }
      }
      reachable_size[i] = reachable[i].size();
    });
    std::vector<std::size_t> coverage(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j : reachable[i]) coverage[j]++;
    }
    bool removed = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (alive[i] && reachable_size[i] > coverage[i]) {
        alive[i] = 0;
        removals.push_back({corpus.meta[i].bug_id, "icf", iteration});
        removed = true;
      }
    }
    if (!removed) break;
  }
  return finish(corpus, alive, std::move(removals), target);
}

SelectionResult select_drop(const Corpus& corpus, std::size_t target) {
  check_target(corpus, target);
  const auto m = corpus.doc_count();
  if (target >= m) return identity_result(corpus);

  NeighborIndex index(corpus.matrix);
  std::vector<char> alive(m, 1);
  std::vector<RemovalRecord> removals;
  wilson_edit(index, corpus, alive, removals);

  // Associates universe: everything that survived the noise filter.
  std::vector<std::size_t> universe;
  for (std::size_t i = 0; i < m; ++i) {
    if (alive[i]) universe.push_back(i);
  }

  // Process instances far from their nearest enemy first.
  std::vector<double> enemy(m, std::numeric_limits<double>::infinity());
  parallel_for(m, [&](std::size_t i) {
    if (!alive[i]) return;
    for (std::size_t j : universe) {
      if (corpus.labels[j] != corpus.labels[i]) {
        enemy[i] = std::min(enemy[i], index.distance(i, j));
      }
    }
  });
  std::vector<std::size_t> order = universe;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (enemy[a] != enemy[b]) return enemy[a] > enemy[b];
    return a < b;
  });

  auto classify_ok = [&](std::size_t a, std::size_t without) {
    std::vector<std::size_t> nn;
    for (std::size_t j = 0; j < m; ++j) {
      if (alive[j] && j != a && j != without) nn.push_back(j);
    }
    const auto depth = std::min<std::size_t>(kEditNeighbors, nn.size());
    std::partial_sort(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(depth),
                      nn.end(), [&](std::size_t x, std::size_t y) {
                        const double dx = index.distance(a, x);
                        const double dy = index.distance(a, y);
                        if (dx != dy) return dx < dy;
                        return x < y;
                      });
    nn.resize(depth);
    if (nn.empty()) return false;
    return vote(nn, corpus.labels) == corpus.labels[a];
  };

  std::size_t kept = alive_count(alive);
  int step = 0;
  const std::size_t npos = std::numeric_limits<std::size_t>::max();
  for (std::size_t x : order) {
    if (kept <= target) break;
    if (!alive[x]) continue;
    // Associates of x: universe members with x among their current 3
    // nearest kept neighbors.
    std::vector<std::size_t> associates;
    for (std::size_t a : universe) {
      if (a == x) continue;
      const auto nn = index.nearest(a, kEditNeighbors, alive);
      if (std::find(nn.begin(), nn.end(), x) != nn.end()) associates.push_back(a);
    }
    int with = 0, without = 0;
    for (std::size_t a : associates) {
      if (classify_ok(a, npos)) ++with;
      if (classify_ok(a, x)) ++without;
    }
    if (without >= with) {
      alive[x] = 0;
      --kept;
      ++step;
      removals.push_back({corpus.meta[x].bug_id, "drop", step});
    }
  }
  return finish(corpus, alive, std::move(removals), target);
}

SelectionResult select_pop(const Corpus& corpus, std::size_t target) {
  check_target(corpus, target);
  const auto m = corpus.doc_count();
  if (target >= m) return identity_result(corpus);

  // Weakness: for every feature, instances interior to a maximal same-class
  // run of the sorted projection gain one point.
  std::vector<int> weakness(m, 0);
  const auto n = corpus.word_count();
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(n);
  for (Eigen::Index i = 0; i < corpus.matrix.rows(); ++i) {
    for (TermMatrix::InnerIterator it(corpus.matrix, i); it; ++it) {
      columns[static_cast<std::size_t>(it.col())].emplace_back(
          static_cast<std::size_t>(i), it.value());
    }
  }
  std::vector<std::vector<int>> per_column(n);
  parallel_for(n, [&](std::size_t t) {
    std::vector<std::pair<double, std::size_t>> proj;
    proj.reserve(m);
    std::vector<char> present(m, 0);
    for (const auto& [row, value] : columns[t]) {
      proj.emplace_back(value, row);
      present[row] = 1;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!present[i]) proj.emplace_back(0.0, i);
    }
    std::sort(proj.begin(), proj.end());
    std::vector<int>& local = per_column[t];
    local.assign(m, 0);
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= proj.size(); ++i) {
      const bool boundary =
          i == proj.size() ||
          corpus.labels[proj[i].second] != corpus.labels[proj[run_start].second];
      if (boundary) {
        for (std::size_t j = run_start + 1; j + 1 < i; ++j) {
          local[proj[j].second] += 1;
        }
        run_start = i;
      }
    }
  });
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) weakness[i] += per_column[t][i];
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weakness[a] != weakness[b]) return weakness[a] > weakness[b];
    return a > b;
  });

  std::vector<char> alive(m, 1);
  std::vector<RemovalRecord> removals;
  std::size_t kept = m;
  for (std::size_t i : order) {
    if (kept <= target || weakness[i] == 0) break;
    alive[i] = 0;
    --kept;
    removals.push_back({corpus.meta[i].bug_id, "pop", 0});
  }
  return finish(corpus, alive, std::move(removals), target);
}

SelectionResult select_lvq(const Corpus& corpus, std::size_t target,
                           const LvqParams& params) {
  check_target(corpus, target);
  const auto m = corpus.doc_count();
  if (target >= m) return identity_result(corpus);
  if (params.passes < 1 || params.initial_rate <= 0.0 || params.initial_rate >= 1.0) {
    throw DataError("lvq: invalid training parameters");
  }

  const auto classes = corpus.present_classes();
  if (target < classes.size()) {
    throw DataError("lvq: target smaller than the number of classes");
  }

  // Class-stratified codebook allocation: at least one per class, at most the
  // class size, remainders to the largest deficits.
  std::vector<std::vector<std::size_t>> members(corpus.developers.size());
  for (std::size_t i = 0; i < m; ++i) {
    members[static_cast<std::size_t>(corpus.labels[i])].push_back(i);
  }
  std::vector<std::size_t> alloc(corpus.developers.size(), 0);
  for (int c : classes) alloc[static_cast<std::size_t>(c)] = 1;
  std::size_t assigned = classes.size();
  while (assigned < target) {
    int best = -1;
    double best_deficit = -1.0;
    for (int c : classes) {
      const auto uc = static_cast<std::size_t>(c);
      if (alloc[uc] >= members[uc].size()) continue;
      const double want = static_cast<double>(target) *
                          static_cast<double>(members[uc].size()) /
                          static_cast<double>(m);
      const double deficit = want - static_cast<double>(alloc[uc]);
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = c;
      }
    }
    if (best < 0) break;  // every class is saturated
    alloc[static_cast<std::size_t>(best)]++;
    ++assigned;
  }

  // Seeded codebook init: distinct training rows per class.
  Rng rng = make_rng(params.seed);
  struct Codebook {
    Eigen::VectorXd w;
    int label;
    double norm;
  };
  std::vector<Codebook> codebooks;
  const auto n = static_cast<Eigen::Index>(corpus.word_count());
  for (int c : classes) {
    const auto& rows = members[static_cast<std::size_t>(c)];
    const auto picks =
        sample_without_replacement(rng, rows.size(), alloc[static_cast<std::size_t>(c)]);
    for (std::size_t p : picks) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      for (TermMatrix::InnerIterator it(corpus.matrix,
                                        static_cast<Eigen::Index>(rows[p]));
           it; ++it) {
        w(it.col()) = it.value();
      }
      codebooks.push_back({std::move(w), c, 0.0});
    }
  }
  for (auto& cb : codebooks) cb.norm = cb.w.norm();

  std::vector<double> doc_norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    doc_norms[i] = row_norm(corpus.matrix, static_cast<Eigen::Index>(i));
  }

  auto codebook_distance = [&](const Codebook& cb, std::size_t doc) {
    if (cb.norm == 0.0 && doc_norms[doc] == 0.0) return 0.0;
    if (cb.norm == 0.0 || doc_norms[doc] == 0.0) return 1.0;
    double dot = 0.0;
    for (TermMatrix::InnerIterator it(corpus.matrix, static_cast<Eigen::Index>(doc));
         it; ++it) {
      dot += it.value() * cb.w(it.col());
    }
    return std::max(0.0, 1.0 - dot / (cb.norm * doc_norms[doc]));
  };

  // LVQ1: winner pulled toward same-class documents, pushed away otherwise.
  const double total_steps = static_cast<double>(params.passes) * static_cast<double>(m);
  std::vector<std::size_t> visit(m);
  std::iota(visit.begin(), visit.end(), 0);
  std::size_t step = 0;
  for (int pass = 0; pass < params.passes; ++pass) {
    shuffle_indices(visit, rng);
    for (std::size_t doc : visit) {
      const double lr =
          params.initial_rate * (1.0 - static_cast<double>(step) / total_steps);
      ++step;
      std::size_t winner = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t cb = 0; cb < codebooks.size(); ++cb) {
        const double d = codebook_distance(codebooks[cb], doc);
        if (d < best) {
          best = d;
          winner = cb;
        }
      }
      Codebook& cb = codebooks[winner];
      const double sign = cb.label == corpus.labels[doc] ? 1.0 : -1.0;
      cb.w *= 1.0 - sign * lr;
      for (TermMatrix::InnerIterator it(corpus.matrix, static_cast<Eigen::Index>(doc));
           it; ++it) {
        cb.w(it.col()) += sign * lr * it.value();
      }
      cb.norm = cb.w.norm();
    }
  }

  // Each codebook elects its nearest same-class document; collisions take
  // the next nearest.
  std::vector<char> taken(m, 0);
  for (const auto& cb : codebooks) {
    std::vector<std::size_t> rows = members[static_cast<std::size_t>(cb.label)];
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      const double da = codebook_distance(cb, a);
      const double db = codebook_distance(cb, b);
      if (da != db) return da < db;
      return a < b;
    });
    for (std::size_t r : rows) {
      if (!taken[r]) {
        taken[r] = 1;
        break;
      }
    }
  }

  std::vector<char> alive(m, 0);
  std::vector<RemovalRecord> removals;
  for (std::size_t i = 0; i < m; ++i) {
    if (taken[i]) {
      alive[i] = 1;
    } else {
      removals.push_back({corpus.meta[i].bug_id, "lvq", 0});
    }
  }
  return finish(corpus, alive, std::move(removals), target);
}

SelectionResult select_instances(const Corpus& corpus, IsAlgorithm algorithm,
                                 std::size_t target, const LvqParams& lvq) {
  switch (algorithm) {
    case IsAlgorithm::ICF: return select_icf(corpus, target);
    case IsAlgorithm::LVQ: return select_lvq(corpus, target, lvq);
    case IsAlgorithm::DROP: return select_drop(corpus, target);
    case IsAlgorithm::POP: return select_pop(corpus, target);
  }
  throw DataError("unknown instance selection algorithm");
}

}  // namespace triage
