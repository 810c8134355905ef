#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace nishimori {

enum class LatticeKind { chain, brickwall, hexagon };

std::string to_string(LatticeKind kind);

/// One auxiliary-mediated coupling between two system sites.
struct Bond {
  int site_a;
  int site_b;
  int aux_id;  // qubit index of the auxiliary, num_sites + bond index
};

struct DualEdge {
  int node;  // plaquette id, or boundary_node()
  int bond;
};

/// Sites, bonds and hexagonal plaquettes of a measurement-based Ising patch.
///
/// Site ids are row-major; bonds are listed row by row (horizontal bonds of a
/// row, then the vertical bonds below it). Plaquettes are stored as 6-cycles of
/// bond ids. The dual graph has one node per plaquette plus a single boundary
/// node that every boundary bond connects to.
///
/// Immutable after construction.
class LatticeGeometry {
 public:
  LatticeKind kind() const { return kind_; }
  /// L_y for brickwall patches, N for chains, 1 for the single hexagon.
  int size_param() const { return size_param_; }
  bool is_2d() const { return kind_ != LatticeKind::chain; }

  int num_sites() const { return num_sites_; }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  int num_qubits() const { return num_sites_ + num_bonds(); }
  int num_plaquettes() const { return static_cast<int>(plaquettes_.size()); }
  int boundary_node() const { return num_plaquettes(); }
  int num_dual_nodes() const { return num_plaquettes() + 1; }

  const std::vector<Bond>& bonds() const { return bonds_; }
  const Bond& bond(int b) const { return bonds_[b]; }
  const std::vector<std::vector<int>>& plaquettes() const { return plaquettes_; }
  const std::vector<int>& plaquette(int p) const { return plaquettes_[p]; }
  /// Plaquettes containing bond b (zero, one or two entries, ascending).
  const std::vector<int>& bond_faces(int b) const { return bond_faces_[b]; }
  /// (neighbor site, bond id) pairs, ascending by bond id.
  const std::vector<std::pair<int, int>>& site_neighbors(int s) const { return site_adj_[s]; }
  const std::vector<DualEdge>& dual_neighbors(int node) const { return dual_adj_[node]; }
  /// 0 for the A sublattice (contains site 0), 1 for B.
  int sublattice(int s) const { return sublattice_[s]; }

  /// Plain-text adjacency dump: header, one bond per line, plaquette blocks.
  std::string serialize() const;
  /// FNV-1a hash of serialize().
  std::uint64_t hash() const;

  friend LatticeGeometry build_brickwall(int ly);
  friend LatticeGeometry build_chain(int n);
  friend LatticeGeometry build_hexagon();

 private:
  LatticeGeometry() = default;
  void finalize();

  LatticeKind kind_ = LatticeKind::chain;
  int size_param_ = 0;
  int num_sites_ = 0;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> plaquettes_;
  std::vector<std::vector<int>> bond_faces_;
  std::vector<std::vector<std::pair<int, int>>> site_adj_;
  std::vector<std::vector<DualEdge>> dual_adj_;
  std::vector<int> sublattice_;
};

/// Honeycomb patch in brickwall form with 2(L_y-1) rows of 2L_y+1 sites.
/// Gives (N, total qubits, plaquettes) = (10, 21, 2), (28, 63, 8), (54, 125, 18)
/// for L_y = 2, 3, 4. Throws std::invalid_argument for L_y < 2.
LatticeGeometry build_brickwall(int ly);

/// Open chain of n sites. Throws std::invalid_argument for n < 2.
LatticeGeometry build_chain(int n);

/// A single hexagonal plaquette: 6 sites, 6 bonds, all on the boundary.
LatticeGeometry build_hexagon();

/// All-pairs hop distances on the dual graph (plaquettes + boundary node) with
/// a fixed shortest-path tree toward every target for path reconstruction.
class DualDistances {
 public:
  explicit DualDistances(const LatticeGeometry& geom);

  int distance(int from, int to) const { return dist_(from, to); }
  const Eigen::MatrixXi& matrix() const { return dist_; }
  int boundary_node() const { return static_cast<int>(dist_.rows()) - 1; }

  /// Bond crossed by the first hop from `from` toward `to`, -1 if from == to.
  int next_bond(int from, int to) const { return next_bond_(from, to); }
  int next_node(int from, int to) const { return next_node_(from, to); }

  /// Bond ids along the fixed shortest dual path, in walking order.
  std::vector<int> path(int from, int to) const;

 private:
  Eigen::MatrixXi dist_;
  Eigen::MatrixXi next_bond_;
  Eigen::MatrixXi next_node_;
};

/// Throws std::invalid_argument for chain geometries.
DualDistances defect_distances(const LatticeGeometry& geom);

}  // namespace nishimori
