#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace nishimori {

struct WeightedEdge {
  int u;
  int v;
  std::int64_t weight;
};

/// Edmonds' weighted blossom algorithm, O(V^3) primal-dual with integer duals.
///
/// Returns mate[v] (or -1). With max_cardinality set, the result has maximum
/// weight among all maximum-cardinality matchings. The object keeps its
/// workspace between calls.
class BlossomMatcher {
 public:
  std::vector<int> solve(int num_vertices, std::span<const WeightedEdge> edges,
                         bool max_cardinality);

 private:
  std::int64_t slack(int k) const;
  void leaves(int b, std::vector<int>& out) const;
  void assign_label(int w, int t, int p);
  int scan_blossom(int v, int w);
  void add_blossom(int base, int k);
  void expand_blossom(int b, bool endstage);
  void augment_blossom(int b, int v);
  void augment_matching(int k);

  int nv_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_, label_, labelend_, inblossom_, blossomparent_, blossombase_;
  std::vector<std::vector<int>> blossomchilds_, blossomendps_, blossombestedges_;
  std::vector<char> has_bestedges_;
  std::vector<int> bestedge_, unused_;
  std::vector<std::int64_t> dualvar_;
  std::vector<char> allowedge_;
  std::vector<int> queue_;
  std::vector<int> scratch_;
};

/// A defect paired with another defect, or with the boundary (second == -1).
/// Indices refer to positions in the defect list.
struct DefectPair {
  int first;
  int second;
};

struct DefectMatching {
  std::vector<DefectPair> pairs;
  std::int64_t weight = 0;
};

/// Minimum-weight pairing of k defects where each defect may instead match the
/// boundary. pair_cost is k x k, boundary_cost has k entries. Reduced to a
/// perfect matching on 2k vertices: one boundary twin per defect, twins pair
/// among themselves at zero cost.
DefectMatching match_with_boundary(const Eigen::MatrixXi& pair_cost,
                                   const Eigen::VectorXi& boundary_cost,
                                   BlossomMatcher& matcher);

}  // namespace nishimori
