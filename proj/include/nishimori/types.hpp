#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <numbers>

namespace nishimori {

/// A column of +/-1 values, one per site or per bond.
using Spins = Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kQuarterPi = std::numbers::pi / 4.0;

}  // namespace nishimori
