#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nishimori/born_sampler.hpp"
#include "nishimori/geometry.hpp"
#include "nishimori/matching.hpp"
#include "nishimori/types.hpp"

namespace nishimori {

/// A matched pair of frustrated plaquettes; second == boundary node for a
/// plaquette matched to the open boundary.
struct PlaquettePair {
  int first;
  int second;
};

struct DecodeResult {
  Spins sigma_prime;
  std::vector<PlaquettePair> matching;
  std::vector<int> flipped_bonds;  // ascending
  int energy = 0;                  // -sum_b s'_b sigma'_i sigma'_j
  std::int64_t matching_weight = 0;
};

/// Plaquettes whose product of s' around the hexagon is -1, ascending.
/// Throws std::invalid_argument for chains.
std::vector<int> frustration(const LatticeGeometry& geom, const Spins& s_prime);

/// Ising energy -sum_b J_b sigma_i sigma_j.
int ising_energy(const LatticeGeometry& geom, const Spins& couplings, const Spins& sigma);

/// Exact ground state of the planar +/-J model defined by s', pinned to
/// sigma'_0 = +1.
///
/// Frustrated plaquettes are paired by minimum-weight perfect matching on
/// dual hop distances (each may instead go to the boundary); the bonds along
/// one fixed shortest dual path per pair are inverted, and the now consistent
/// couplings are integrated over a BFS spanning tree from site 0.
///
/// Holds the dual distance table and a matching workspace, so one decoder per
/// worker thread.
class Decoder {
 public:
  explicit Decoder(const LatticeGeometry& geom);

  const LatticeGeometry& geometry() const { return *geom_; }
  const DualDistances& distances() const { return dist_; }

  DecodeResult decode(const Spins& s_prime);
  /// Fast path used by the sweeps: fills sigma_prime only.
  void decode_into(const Spins& s_prime, Spins& sigma_prime);

  /// Human-readable one-line trace of a decode (defects, pairs, flips).
  static std::string trace(const DecodeResult& r);

  /// Re-checks the matching-validity invariant after every decode.
  bool verify = false;

 private:
  void run(const Spins& s_prime, bool keep_details);

  const LatticeGeometry* geom_;
  DualDistances dist_;
  BlossomMatcher matcher_;
  std::vector<int> tree_order_;  // BFS order of sites from site 0
  std::vector<int> tree_bond_;   // bond to BFS parent
  std::vector<int> tree_parent_;
  // workspace
  std::vector<int> defects_;
  std::vector<char> flip_;
  DefectMatching matched_;
  Spins sigma_;
};

/// 1D decoding by prefix products: sigma'_1 = +1, sigma'_{j+1} = sigma'_j s'_{j,j+1}.
/// Throws std::invalid_argument for 2D geometries.
DecodeResult decode_chain(const LatticeGeometry& geom, const Spins& s_prime);

/// sigma' for either geometry kind: matching decoder in 2D, prefix products on
/// chains. One instance per worker thread.
class ReplicaDecoder {
 public:
  explicit ReplicaDecoder(const LatticeGeometry& geom);
  ReplicaDecoder(ReplicaDecoder&&) noexcept = default;
  ~ReplicaDecoder();

  void operator()(const Spins& s_prime, Spins& sigma_prime);

 private:
  const LatticeGeometry* geom_;
  std::unique_ptr<Decoder> decoder_;
};

/// Elementwise sigma_readout * sigma'.
Spins corrected_bits(const Shot& shot, const Spins& sigma_prime);

}  // namespace nishimori
