#pragma once

#include <Eigen/Core>

#include "nishimori/matching.hpp"

namespace nishimori::oracle {

inline constexpr int kMaxExhaustiveDefects = 12;

/// Optimal pairing by enumerating every way to pair defects or send them to
/// the boundary. Same cost model as match_with_boundary.
/// Throws std::invalid_argument for more than kMaxExhaustiveDefects defects.
DefectMatching exhaustive_matching(const Eigen::MatrixXi& pair_cost,
                                   const Eigen::VectorXi& boundary_cost);

}  // namespace nishimori::oracle
