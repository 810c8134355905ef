#pragma once

#include "nishimori/geometry.hpp"
#include "nishimori/types.hpp"

namespace nishimori::oracle {

inline constexpr int kMaxBruteForceSites = 24;

struct GroundState {
  Spins sigma;  // sigma[0] = +1
  int energy = 0;
};

/// Exhaustive minimum of -sum_b J_b sigma_i sigma_j over all configurations with
/// sigma_0 = +1, walked in Gray-code order. The first minimizer found is returned.
/// Throws std::invalid_argument above kMaxBruteForceSites sites.
GroundState brute_force_ground_state(const LatticeGeometry& geom, const Spins& couplings);

}  // namespace nishimori::oracle
