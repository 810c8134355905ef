#include "nishimori/born_sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nishimori {

namespace {

void check_angle(double t_a) {
  if (!(t_a >= 0.0 && t_a <= kQuarterPi))
    throw std::invalid_argument("t_A must lie in [0, pi/4], got " + std::to_string(t_a));
}

void check_prob(double p, double hi, const char* name) {
  if (!(p >= 0.0 && p <= hi))
    throw std::invalid_argument(std::string(name) + " out of range: " + std::to_string(p));
}

}  // namespace

double beta_of(double t_a) {
  check_angle(t_a);
  if (t_a == kQuarterPi) return std::numeric_limits<double>::infinity();
  // -log tan(pi/4 - t), in a form that is exact at t = 0
  return 2.0 * std::atanh(std::tan(t_a));
}

double coherent_flip_prob(double t_a) {
  check_angle(t_a);
  const double u = std::sin(kQuarterPi - t_a);
  return u * u;
}

double effective_flip_prob(double t_a, double p_s) {
  check_prob(p_s, 0.5, "p_s");
  const double a = coherent_flip_prob(t_a);
  return a * (1.0 - p_s) + (1.0 - a) * p_s;
}

ProtocolParams ProtocolParams::make(double t_a, double p_s, double p_sigma, std::uint64_t shots,
                                    std::uint64_t seed) {
  check_prob(p_sigma, 0.5, "p_sigma");
  if (shots == 0) throw std::invalid_argument("shots must be positive");
  ProtocolParams p;
  p.t_a = t_a;
  p.beta = beta_of(t_a);
  p.p_tilde = effective_flip_prob(t_a, p_s);
  p.p_s = p_s;
  p.p_sigma = p_sigma;
  p.shots = shots;
  p.seed = seed;
  return p;
}

void sample_shot_into(const LatticeGeometry& geom, double coherent_flip, Rng& rng, Shot& shot) {
  const int n = geom.num_sites();
  const int nb = geom.num_bonds();
  shot.sigma.resize(n);
  shot.s.resize(nb);
  std::uint64_t bits = 0;
  for (int j = 0; j < n; ++j) {
    if (j % 64 == 0) bits = rng();
    shot.sigma[j] = (bits & 1) ? std::int8_t{-1} : std::int8_t{1};
    bits >>= 1;
  }
  for (int b = 0; b < nb; ++b) {
    const auto& bd = geom.bond(b);
    const auto favoured = static_cast<std::int8_t>(shot.sigma[bd.site_a] * shot.sigma[bd.site_b]);
    shot.s[b] = rng.bernoulli(coherent_flip) ? static_cast<std::int8_t>(-favoured) : favoured;
  }
  shot.s_prime = shot.s;
  shot.sigma_readout = shot.sigma;
}

Shot sample_shot(const LatticeGeometry& geom, double t_a, Rng& rng) {
  Shot shot;
  sample_shot_into(geom, coherent_flip_prob(t_a), rng, shot);
  return shot;
}

void apply_noise(Shot& shot, double p_s, double p_sigma, Rng& rng) {
  shot.s_prime = shot.s;
  shot.sigma_readout = shot.sigma;
  if (p_s > 0.0)
    for (Eigen::Index b = 0; b < shot.s_prime.size(); ++b)
      if (rng.bernoulli(p_s)) shot.s_prime[b] = static_cast<std::int8_t>(-shot.s_prime[b]);
  if (p_sigma > 0.0)
    for (Eigen::Index j = 0; j < shot.sigma_readout.size(); ++j)
      if (rng.bernoulli(p_sigma))
        shot.sigma_readout[j] = static_cast<std::int8_t>(-shot.sigma_readout[j]);
}

double exact_joint_probability(const LatticeGeometry& geom, double t_a, const Spins& sigma,
                               const Spins& s) {
  const double a = coherent_flip_prob(t_a);
  double p = std::ldexp(1.0, -geom.num_sites());
  for (int b = 0; b < geom.num_bonds(); ++b) {
    const auto& bd = geom.bond(b);
    const bool satisfied = s[b] == sigma[bd.site_a] * sigma[bd.site_b];
    p *= satisfied ? 1.0 - a : a;
  }
  return p;
}

}  // namespace nishimori
