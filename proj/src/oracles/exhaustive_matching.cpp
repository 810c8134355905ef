#include "nishimori/oracles/exhaustive_matching.hpp"

#include <limits>
#include <stdexcept>

namespace nishimori::oracle {

namespace {

struct Search {
  const Eigen::MatrixXi& pair_cost;
  const Eigen::VectorXi& boundary_cost;
  int k;
  std::vector<char> used;
  std::vector<DefectPair> current;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<DefectPair> best_pairs;

  void run(int from, std::int64_t weight) {
    if (weight >= best) return;
    int i = from;
    while (i < k && used[i]) ++i;
    if (i == k) {
      best = weight;
      best_pairs = current;
      return;
    }
    used[i] = 1;
    current.push_back({i, -1});
    run(i + 1, weight + boundary_cost[i]);
    current.pop_back();
    for (int j = i + 1; j < k; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      current.push_back({i, j});
      run(i + 1, weight + pair_cost(i, j));
      current.pop_back();
      used[j] = 0;
    }
    used[i] = 0;
  }
};

}  // namespace

DefectMatching exhaustive_matching(const Eigen::MatrixXi& pair_cost,
                                   const Eigen::VectorXi& boundary_cost) {
  const int k = static_cast<int>(boundary_cost.size());
  if (k > kMaxExhaustiveDefects) throw std::invalid_argument("exhaustive_matching: too many defects");
  if (pair_cost.rows() != k || pair_cost.cols() != k)
    throw std::invalid_argument("exhaustive_matching: cost matrix shape mismatch");
  Search search{pair_cost, boundary_cost, k, std::vector<char>(k, 0), {},
                std::numeric_limits<std::int64_t>::max(), {}};
  search.run(0, 0);
  return {search.best_pairs, search.best};
}

}  // namespace nishimori::oracle
