#pragma once

#include <cstdint>
#include <limits>

#include "nishimori/geometry.hpp"
#include "nishimori/rng.hpp"
#include "nishimori/types.hpp"

namespace nishimori {

/// Inverse temperature of the post-measurement state, 2 artanh(tan t_A).
/// Returns +infinity at the Clifford point t_A = pi/4.
/// Throws std::invalid_argument outside [0, pi/4].
double beta_of(double t_a);

/// Bond-flip probability from the coherent rotation alone, (1 - sin 2t_A)/2.
/// Evaluated as sin^2(pi/4 - t_A), which stays accurate near the Clifford point.
double coherent_flip_prob(double t_a);

/// Effective disorder probability: the coherent flip composed with an
/// independent syndrome flip of probability p_s (binary symmetric channels).
double effective_flip_prob(double t_a, double p_s);

struct ProtocolParams {
  double t_a = kQuarterPi;
  double beta = std::numeric_limits<double>::infinity();
  double p_tilde = 0.0;
  double p_s = 0.0;
  double p_sigma = 0.0;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;

  /// Validates the inputs and fills the derived beta and p_tilde.
  static ProtocolParams make(double t_a, double p_s = 0.0, double p_sigma = 0.0,
                             std::uint64_t shots = 1, std::uint64_t seed = 0);
};

/// One measurement record. Internally s = +1 means the bond favours
/// sigma_i sigma_j = +1; the device convention is the global relabelling s -> -s.
struct Shot {
  Spins sigma;
  Spins s;
  Spins s_prime;
  Spins sigma_readout;
};

/// Draws sigma uniformly and each bond syndrome independently: satisfied with
/// probability 1 - (1 - sin 2t_A)/2. Leaves s_prime = s and sigma_readout = sigma.
Shot sample_shot(const LatticeGeometry& geom, double t_a, Rng& rng);
void sample_shot_into(const LatticeGeometry& geom, double coherent_flip, Rng& rng, Shot& shot);

/// Flips each syndrome with probability p_s and each data bit with probability
/// p_sigma, filling s_prime and sigma_readout from s and sigma.
void apply_noise(Shot& shot, double p_s, double p_sigma, Rng& rng);

/// Exact probability of (sigma, s) under the sampler's joint law, internal
/// sign convention: 2^-N * prod_b (satisfied ? 1 - a : a).
double exact_joint_probability(const LatticeGeometry& geom, double t_a, const Spins& sigma,
                               const Spins& s);

}  // namespace nishimori
