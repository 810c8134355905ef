#include "nishimori/oracles/brute_force.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace nishimori::oracle {

GroundState brute_force_ground_state(const LatticeGeometry& geom, const Spins& couplings) {
  const int n = geom.num_sites();
  if (n > kMaxBruteForceSites)
    throw std::invalid_argument("brute_force_ground_state: too many sites");
  if (couplings.size() != geom.num_bonds())
    throw std::invalid_argument("brute_force_ground_state: one coupling per bond required");

  Spins sigma = Spins::Ones(n);
  int energy = 0;
  for (int b = 0; b < geom.num_bonds(); ++b) energy -= couplings[b];

  GroundState best{sigma, energy};
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < count; ++k) {
    const int site = 1 + std::countr_zero(k);
    // flipping `site` negates every incident bond term
    int delta = 0;
    for (const auto& [nb, b] : geom.site_neighbors(site))
      delta += 2 * couplings[b] * sigma[site] * sigma[nb];
    sigma[site] = static_cast<std::int8_t>(-sigma[site]);
    energy += delta;
    if (energy < best.energy) {
      best.energy = energy;
      best.sigma = sigma;
    }
  }
  return best;
}

}  // namespace nishimori::oracle
