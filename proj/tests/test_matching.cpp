#include <algorithm>
#include <functional>

#include "doctest.h"
#include "nishimori/geometry.hpp"
#include "nishimori/matching.hpp"
#include "nishimori/oracles/exhaustive_matching.hpp"
#include "nishimori/rng.hpp"

using namespace nishimori;

namespace {

// Best (cardinality, weight) over all matchings of a small graph by recursion.
std::pair<int, std::int64_t> best_matching(int n, const std::vector<WeightedEdge>& edges,
                                           bool max_cardinality) {
  std::vector<char> used(n, 0);
  std::pair<int, std::int64_t> best{0, 0};
  std::function<void(std::size_t, int, std::int64_t)> rec = [&](std::size_t e, int card,
                                                                std::int64_t w) {
    if (e == edges.size()) {
      const bool better = max_cardinality ? std::make_pair(card, w) > best : w > best.second;
      if (better) best = {card, w};
      return;
    }
    rec(e + 1, card, w);
    const auto& ed = edges[e];
    if (!used[ed.u] && !used[ed.v]) {
      used[ed.u] = used[ed.v] = 1;
      rec(e + 1, card + 1, w + ed.weight);
      used[ed.u] = used[ed.v] = 0;
    }
  };
  rec(0, 0, 0);
  return best;
}

std::pair<int, std::int64_t> score(const std::vector<int>& mate,
                                   const std::vector<WeightedEdge>& edges) {
  int card = 0;
  std::int64_t w = 0;
  for (const auto& e : edges) {
    if (mate[e.u] == e.v) {
      CHECK(mate[e.v] == e.u);
      ++card;
      w += e.weight;
    }
  }
  return {card, w};
}

}  // namespace

TEST_CASE("blossom matches brute force on small random graphs") {
  Rng rng(77);
  BlossomMatcher matcher;
  for (int trial = 0; trial < 600; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    std::vector<WeightedEdge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.bernoulli(0.6)) edges.push_back({u, v, static_cast<std::int64_t>(rng.below(20)) - 4});
    if (edges.size() > 16) edges.resize(16);
    for (bool maxcard : {false, true}) {
      const auto mate = matcher.solve(n, edges, maxcard);
      const auto got = score(mate, edges);
      const auto want = best_matching(n, edges, maxcard);
      if (maxcard) {
        CHECK(got.first == want.first);
        CHECK(got.second == want.second);
      } else {
        CHECK(got.second == want.second);
      }
    }
  }
}

TEST_CASE("blossom handles odd cycles (blossom contraction)") {
  // triangle 0-1-2 with a pendant 2-3; the optimum uses 0-1 and 2-3
  std::vector<WeightedEdge> edges{{0, 1, 5}, {1, 2, 6}, {0, 2, 5}, {2, 3, 4}};
  BlossomMatcher m;
  const auto mate = m.solve(4, edges, false);
  CHECK(mate[0] == 1);
  CHECK(mate[2] == 3);
}

TEST_CASE("boundary matching equals exhaustive search on dual distances") {
  const auto g = build_brickwall(4);
  const auto d = defect_distances(g);
  Rng rng(2718);
  BlossomMatcher matcher;
  int checked = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(12));
    std::vector<int> plaquettes(g.num_plaquettes());
    for (int i = 0; i < g.num_plaquettes(); ++i) plaquettes[i] = i;
    for (int i = 0; i < k; ++i)
      std::swap(plaquettes[i], plaquettes[i + rng.below(plaquettes.size() - i)]);
    Eigen::MatrixXi pc(k, k);
    Eigen::VectorXi bc(k);
    for (int i = 0; i < k; ++i) {
      bc[i] = d.distance(plaquettes[i], g.boundary_node());
      for (int j = 0; j < k; ++j) pc(i, j) = d.distance(plaquettes[i], plaquettes[j]);
    }
    const auto fast = match_with_boundary(pc, bc, matcher);
    const auto slow = oracle::exhaustive_matching(pc, bc);
    CHECK(fast.weight == slow.weight);
    std::vector<int> seen(k, 0);
    for (const auto& p : fast.pairs) {
      ++seen[p.first];
      if (p.second >= 0) ++seen[p.second];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    ++checked;
  }
  CHECK(checked >= 1000);
}

TEST_CASE("boundary matching with arbitrary integer costs") {
  Rng rng(31);
  BlossomMatcher matcher;
  for (int trial = 0; trial < 400; ++trial) {
    const int k = static_cast<int>(rng.below(11));
    Eigen::MatrixXi pc(k, k);
    Eigen::VectorXi bc(k);
    for (int i = 0; i < k; ++i) {
      bc[i] = static_cast<int>(rng.below(9));
      pc(i, i) = 0;
      for (int j = i + 1; j < k; ++j) pc(i, j) = pc(j, i) = static_cast<int>(rng.below(9));
    }
    CHECK(match_with_boundary(pc, bc, matcher).weight == oracle::exhaustive_matching(pc, bc).weight);
  }
}
