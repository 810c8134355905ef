#pragma once

#include <cstdint>
#include <vector>

#include "nishimori/geometry.hpp"

namespace nishimori {

/// A GHZ stabilizer on N sites. Z-type: Z on the (even) support. X/Y-type: Y on
/// the (even) support, X elsewhere, with eigenvalue sign (-1)^{|support|/2}.
struct GhzStabilizer {
  bool z_type = true;
  std::vector<std::uint64_t> support;  // bit j = site j
  int sign = 1;
};

struct FidelityOptions {
  int num_sampled = 30;          // S, size of the X/Y pool
  int instances = 500;           // k
  int z_pool = 1000;             // capped at 2^{N-1} - 1
  int shots_per_observable = 1000;
  double p_s = 0.0;
  double p_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct FidelityEstimate {
  double f_hat = 0.0;
  double std_error = 0.0;  // standard deviation over the resampling instances
  int num_sites = 0;
  int num_sampled = 0;     // S
  int instances = 0;       // k
  int draws_per_pool = 0;  // S' = floor(3S/4)
  int z_pool = 0;
  double mean_z = 0.0;   // mean over the whole Z pool
  double mean_xy = 0.0;  // mean over the whole X/Y pool
  std::vector<double> xy_values;
  std::vector<double> z_values;
};

/// Monte Carlo GHZ fidelity of the decoded Clifford-point state.
///
/// Measures S distinct X/Y stabilizers (one basis setting each) and a pool of
/// distinct nontrivial Z stabilizers (all from one all-Z setting). Every shot is
/// decoded and the correcting flips are applied to the Y/Z support. Each of the
/// k instances averages S' draws without replacement from each pool;
/// f_hat is the grand mean, std_error the spread across instances.
///
/// Throws std::invalid_argument if either pool is smaller than S'.
FidelityEstimate estimate_fidelity(const LatticeGeometry& geom, const FidelityOptions& opt);

}  // namespace nishimori
