#pragma once

#include <array>
#include <vector>

#include "nishimori/geometry.hpp"
#include "nishimori/types.hpp"

namespace nishimori::oracle {

/// exp(-i angle Z_site Z_aux) between a site and the auxiliary of one of its bonds.
struct Coupling {
  int site;
  int bond;
  double angle;
};

/// The constant-depth protocol circuit: sites and auxiliaries start in |+>,
/// three entangling layers of ZZ rotations, auxiliaries read out in X, sites in Z.
///
/// A-sublattice sites couple with angle t_A, B-sublattice sites with the
/// Clifford angle pi/4. Each layer touches every qubit at most once.
struct CircuitSpec {
  const LatticeGeometry* geom = nullptr;
  double t_a = kQuarterPi;
  std::array<std::vector<Coupling>, 3> layers;

  int num_qubits() const { return geom->num_qubits(); }
};

/// Colours the site-auxiliary incidence graph with three colours (bipartite,
/// max degree 3) by alternating-path recolouring.
CircuitSpec build_circuit(const LatticeGeometry& geom, double t_a);

/// Index of an outcome in the oracle tables. Bit q set means qubit q read -1:
/// sites by sigma, auxiliaries by the device's X outcome, which is -s in the
/// internal convention.
std::size_t outcome_index(const LatticeGeometry& geom, const Spins& sigma, const Spins& s);

/// Inverse of outcome_index.
void decode_outcome(const LatticeGeometry& geom, std::size_t index, Spins& sigma, Spins& s);

}  // namespace nishimori::oracle
