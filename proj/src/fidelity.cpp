#include "nishimori/fidelity.hpp"

#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

#include "nishimori/decoder.hpp"
#include "nishimori/oracles/circuit.hpp"
#include "nishimori/oracles/tableau.hpp"
#include "nishimori/rng.hpp"

namespace nishimori {

namespace {

using Mask = std::vector<std::uint64_t>;

Mask pack(const Spins& v) {
  Mask m((static_cast<std::size_t>(v.size()) + 63) / 64, 0);
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (v[j] < 0) m[j / 64] |= std::uint64_t{1} << (j % 64);
  return m;
}

bool odd_overlap(const Mask& a, const Mask& b) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc ^= a[i] & b[i];
  return std::popcount(acc) & 1;
}

int weight(const Mask& m) {
  int w = 0;
  for (auto x : m) w += std::popcount(x);
  return w;
}

// Uniform even-weight subset of n sites; the last site fixes the parity.
Mask random_even_subset(int n, Rng& rng) {
  Mask m((static_cast<std::size_t>(n) + 63) / 64, 0);
  int parity = 0;
  for (int j = 0; j + 1 < n; ++j) {
    if (j % 64 == 0) m[j / 64] = 0;
    if (rng() >> 63) {
      m[j / 64] |= std::uint64_t{1} << (j % 64);
      parity ^= 1;
    }
  }
  if (parity) m[(n - 1) / 64] |= std::uint64_t{1} << ((n - 1) % 64);
  return m;
}

bool is_zero(const Mask& m) {
  for (auto x : m)
    if (x) return false;
  return true;
}

// Number of even subsets of n sites, saturating.
double even_subsets(int n) { return std::ldexp(1.0, n - 1); }

}  // namespace

FidelityEstimate estimate_fidelity(const LatticeGeometry& geom, const FidelityOptions& opt) {
  const int n = geom.num_sites();
  if (opt.num_sampled < 1) throw std::invalid_argument("estimate_fidelity: S must be positive");
  if (opt.instances < 1) throw std::invalid_argument("estimate_fidelity: k must be positive");
  if (opt.shots_per_observable < 1)
    throw std::invalid_argument("estimate_fidelity: shots per observable must be positive");
  if (static_cast<double>(opt.num_sampled) > even_subsets(n))
    throw std::invalid_argument("estimate_fidelity: S exceeds the number of X/Y stabilizers");

  const int draws = (3 * opt.num_sampled) / 4;
  const int z_pool = static_cast<int>(std::min<double>(opt.z_pool, even_subsets(n) - 1.0));
  if (draws < 1) throw std::invalid_argument("estimate_fidelity: S too small for S' >= 1");
  if (z_pool < draws) throw std::invalid_argument("estimate_fidelity: Z pool smaller than S'");

  // Stabilizer pools.
  Rng pick = Rng::stream(opt.seed, 0, 0);
  std::vector<Mask> xy;
  {
    std::set<Mask> seen;
    while (static_cast<int>(xy.size()) < opt.num_sampled) {
      Mask m = random_even_subset(n, pick);
      if (seen.insert(m).second) xy.push_back(std::move(m));
    }
  }
  std::vector<Mask> zs;
  if (static_cast<double>(z_pool) == even_subsets(n) - 1.0) {
    for (std::uint64_t v = 1; v < (std::uint64_t{1} << (n - 1)); ++v) {
      Mask m((static_cast<std::size_t>(n) + 63) / 64, 0);
      m[0] = v;
      if (std::popcount(v) & 1) m[(n - 1) / 64] |= std::uint64_t{1} << ((n - 1) % 64);
      zs.push_back(std::move(m));
    }
  } else {
    std::set<Mask> seen;
    while (static_cast<int>(zs.size()) < z_pool) {
      Mask m = random_even_subset(n, pick);
      if (!is_zero(m) && seen.insert(m).second) zs.push_back(std::move(m));
    }
  }

  const auto spec = oracle::build_circuit(geom, kQuarterPi);
  const oracle::CliffordProtocol protocol(spec);
  ReplicaDecoder decode(geom);
  Shot shot;
  Spins sigma_prime;
  std::vector<std::uint64_t> assignment;
  const int shots = opt.shots_per_observable;

  FidelityEstimate est;
  est.num_sites = n;
  est.num_sampled = opt.num_sampled;
  est.instances = opt.instances;
  est.draws_per_pool = draws;
  est.z_pool = z_pool;

  // Z pool: one all-Z setting serves every Z stabilizer.
  {
    const auto forms = protocol.forms();
    std::vector<std::int64_t> sums(zs.size(), 0);
    for (int i = 0; i < shots; ++i) {
      Rng rng = Rng::stream(opt.seed, 1, static_cast<std::uint64_t>(i));
      oracle::tableau_sample_into(forms, opt.p_s, opt.p_sigma, rng, shot, assignment);
      decode(shot.s_prime, sigma_prime);
      const Mask corrected = pack(corrected_bits(shot, sigma_prime));
      for (std::size_t z = 0; z < zs.size(); ++z) sums[z] += odd_overlap(corrected, zs[z]) ? -1 : 1;
    }
    for (auto s : sums) est.z_values.push_back(static_cast<double>(s) / shots);
  }

  // X/Y pool: Y on the support, X elsewhere; one setting per stabilizer.
  std::vector<oracle::PauliBasis> basis(n);
  for (std::size_t o = 0; o < xy.size(); ++o) {
    for (int j = 0; j < n; ++j)
      basis[j] = (xy[o][j / 64] >> (j % 64)) & 1 ? oracle::PauliBasis::Y : oracle::PauliBasis::X;
    const auto forms = protocol.forms(basis);
    const int sign = (weight(xy[o]) / 2) % 2 ? -1 : 1;
    std::int64_t sum = 0;
    for (int i = 0; i < shots; ++i) {
      Rng rng = Rng::stream(opt.seed, 2 + o, static_cast<std::uint64_t>(i));
      oracle::tableau_sample_into(forms, opt.p_s, opt.p_sigma, rng, shot, assignment);
      decode(shot.s_prime, sigma_prime);
      // readout parity over all sites, times the correction on the Y support
      const Mask m = pack(shot.sigma_readout);
      const Mask c = pack(sigma_prime);
      int parity = 0;
      for (std::size_t w = 0; w < m.size(); ++w)
        parity ^= std::popcount(m[w] ^ (c[w] & xy[o][w])) & 1;
      sum += parity ? -sign : sign;
    }
    est.xy_values.push_back(static_cast<double>(sum) / shots);
  }

  for (double v : est.z_values) est.mean_z += v;
  est.mean_z /= static_cast<double>(est.z_values.size());
  for (double v : est.xy_values) est.mean_xy += v;
  est.mean_xy /= static_cast<double>(est.xy_values.size());

  // Resampling instances.
  std::vector<double> means;
  std::vector<int> zi(zs.size()), xi(xy.size());
  for (int inst = 0; inst < opt.instances; ++inst) {
    Rng rng = Rng::stream(opt.seed, 3, static_cast<std::uint64_t>(inst));
    for (std::size_t i = 0; i < zi.size(); ++i) zi[i] = static_cast<int>(i);
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = static_cast<int>(i);
    double total = 0.0;
    for (int d = 0; d < draws; ++d) {
      const auto a = d + rng.below(zi.size() - d);
      std::swap(zi[d], zi[a]);
      total += est.z_values[zi[d]];
      const auto b = d + rng.below(xi.size() - d);
      std::swap(xi[d], xi[b]);
      total += est.xy_values[xi[d]];
    }
    means.push_back(total / (2.0 * draws));
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  est.f_hat = grand;
  est.std_error = means.size() > 1 ? std::sqrt(var / static_cast<double>(means.size() - 1)) : 0.0;
  return est;
}

}  // namespace nishimori
