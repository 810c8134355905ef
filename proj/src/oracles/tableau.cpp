#include "nishimori/oracles/tableau.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace nishimori::oracle {

bool AffineBit::evaluate(std::span<const std::uint64_t> assignment) const {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < words.size(); ++i) acc ^= words[i] & assignment[i];
  return std::popcount(acc) & 1;
}

AffineTableau::AffineTableau(int num_qubits, int max_coins)
    : n_(num_qubits), w_((num_qubits + 63) / 64), sw_((max_coins + 1 + 63) / 64),
      max_coins_(max_coins) {
  const std::size_t rows = 2 * static_cast<std::size_t>(n_) + 1;
  x_.assign(rows * w_, 0);
  z_.assign(rows * w_, 0);
  r_.assign(rows * sw_, 0);
  for (int i = 0; i < n_; ++i) {
    x_[i * w_ + i / 64] |= std::uint64_t{1} << (i % 64);
    z_[(n_ + i) * w_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

void AffineTableau::h(int q) {
  const int word = q / 64;
  const std::uint64_t bit = std::uint64_t{1} << (q % 64);
  for (int row = 0; row < 2 * n_; ++row) {
    auto& xw = x_[row * w_ + word];
    auto& zw = z_[row * w_ + word];
    if ((xw & bit) && (zw & bit)) flip_const(row);
    const std::uint64_t xb = xw & bit;
    const std::uint64_t zb = zw & bit;
    xw = (xw & ~bit) | zb;
    zw = (zw & ~bit) | xb;
  }
}

void AffineTableau::s(int q) {
  const int word = q / 64;
  const std::uint64_t bit = std::uint64_t{1} << (q % 64);
  for (int row = 0; row < 2 * n_; ++row) {
    const auto xw = x_[row * w_ + word];
    auto& zw = z_[row * w_ + word];
    if ((xw & bit) && (zw & bit)) flip_const(row);
    zw ^= xw & bit;
  }
}

void AffineTableau::s_dag(int q) {
  s(q);
  s(q);
  s(q);
}

void AffineTableau::cx(int control, int target) {
  for (int row = 0; row < 2 * n_; ++row) {
    const bool xc = x(row, control);
    const bool zt = z(row, target);
    const bool xt = x(row, target);
    const bool zc = z(row, control);
    if (xc && zt && (xt == zc)) flip_const(row);
    if (xc) x_[row * w_ + target / 64] ^= std::uint64_t{1} << (target % 64);
    if (zt) z_[row * w_ + control / 64] ^= std::uint64_t{1} << (control % 64);
  }
}

void AffineTableau::cz(int a, int b) {
  h(b);
  cx(a, b);
  h(b);
}

// Left-multiplies row h by row i, tracking the i^k phase of the product.
void AffineTableau::rowsum(int h, int i) {
  int total = 0;
  for (int w = 0; w < w_; ++w) {
    const std::uint64_t x1 = x_[i * w_ + w];
    const std::uint64_t z1 = z_[i * w_ + w];
    const std::uint64_t x2 = x_[h * w_ + w];
    const std::uint64_t z2 = z_[h * w_ + w];
    const std::uint64_t pos = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2);
    const std::uint64_t neg = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2);
    total += std::popcount(pos) - std::popcount(neg);
    x_[h * w_ + w] = x1 ^ x2;
    z_[h * w_ + w] = z1 ^ z2;
  }
  for (int w = 0; w < sw_; ++w) r_[h * sw_ + w] ^= r_[i * sw_ + w];
  if (((total % 4) + 4) % 4 == 2) flip_const(h);
}

void AffineTableau::copy_row(int dst, int src) {
  for (int w = 0; w < w_; ++w) {
    x_[dst * w_ + w] = x_[src * w_ + w];
    z_[dst * w_ + w] = z_[src * w_ + w];
  }
  for (int w = 0; w < sw_; ++w) r_[dst * sw_ + w] = r_[src * sw_ + w];
}

void AffineTableau::clear_row(int row) {
  for (int w = 0; w < w_; ++w) x_[row * w_ + w] = z_[row * w_ + w] = 0;
  for (int w = 0; w < sw_; ++w) r_[row * sw_ + w] = 0;
}

AffineBit AffineTableau::measure_z(int q) {
  int p = -1;
  for (int i = n_; i < 2 * n_; ++i) {
    if (x(i, q)) {
      p = i;
      break;
    }
  }
  AffineBit out;
  if (p >= 0) {
    if (coins_ >= max_coins_) throw std::logic_error("AffineTableau: coin capacity exceeded");
    for (int i = 0; i < 2 * n_; ++i)
      if (i != p && x(i, q)) rowsum(i, p);
    copy_row(p - n_, p);
    clear_row(p);
    z_[p * w_ + q / 64] |= std::uint64_t{1} << (q % 64);
    ++coins_;
    r_[p * sw_ + coins_ / 64] |= std::uint64_t{1} << (coins_ % 64);
    out.words.assign(r_.begin() + p * sw_, r_.begin() + (p + 1) * sw_);
  } else {
    const int scratch = 2 * n_;
    clear_row(scratch);
    for (int i = 0; i < n_; ++i)
      if (x(i, q)) rowsum(scratch, i + n_);
    out.words.assign(r_.begin() + scratch * sw_, r_.begin() + (scratch + 1) * sw_);
  }
  return out;
}

namespace {

AffineTableau prepare(const CircuitSpec& spec, std::vector<AffineBit>& syndromes) {
  const auto& geom = *spec.geom;
  const int n = geom.num_sites();
  AffineTableau t(geom.num_qubits(), geom.num_qubits());
  for (int q = 0; q < geom.num_qubits(); ++q) t.h(q);
  for (const auto& layer : spec.layers)
    for (const auto& c : layer) t.cz(c.site, n + c.bond);
  syndromes.clear();
  for (int b = 0; b < geom.num_bonds(); ++b) {
    t.h(n + b);
    syndromes.push_back(t.measure_z(n + b));
  }
  return t;
}

const CircuitSpec& require_clifford(const CircuitSpec& spec) {
  if (spec.t_a != kQuarterPi)
    throw std::invalid_argument("CliffordProtocol: t_A must equal pi/4 for stabilizer simulation");
  return spec;
}

}  // namespace

CliffordProtocol::CliffordProtocol(const CircuitSpec& spec)
    : geom_(require_clifford(spec).geom), syndromes_(), after_syndromes_(prepare(spec, syndromes_)) {}

ProtocolForms CliffordProtocol::forms() const {
  std::vector<PauliBasis> basis(geom_->num_sites(), PauliBasis::Z);
  return forms(basis);
}

ProtocolForms CliffordProtocol::forms(std::span<const PauliBasis> basis) const {
  if (static_cast<int>(basis.size()) != geom_->num_sites())
    throw std::invalid_argument("CliffordProtocol::forms: one basis per site required");
  AffineTableau t = after_syndromes_;
  ProtocolForms f;
  f.syndromes = syndromes_;
  for (int j = 0; j < geom_->num_sites(); ++j) {
    if (basis[j] == PauliBasis::X) {
      t.h(j);
    } else if (basis[j] == PauliBasis::Y) {
      t.s_dag(j);
      t.h(j);
    }
    f.sites.push_back(t.measure_z(j));
  }
  f.num_coins = t.num_coins();
  f.sign_words = t.sign_words();
  return f;
}

void tableau_sample_into(const ProtocolForms& forms, double p_s, double p_sigma, Rng& rng,
                         Shot& shot, std::vector<std::uint64_t>& assignment) {
  assignment.assign(static_cast<std::size_t>(forms.sign_words), 0);
  for (int w = 0; w < forms.sign_words; ++w) assignment[w] = rng();
  assignment[0] |= 1;  // constant term
  const auto nb = static_cast<Eigen::Index>(forms.syndromes.size());
  const auto ns = static_cast<Eigen::Index>(forms.sites.size());
  shot.s.resize(nb);
  shot.sigma.resize(ns);
  for (Eigen::Index b = 0; b < nb; ++b)
    shot.s[b] = forms.syndromes[b].evaluate(assignment) ? std::int8_t{-1} : std::int8_t{1};
  for (Eigen::Index j = 0; j < ns; ++j)
    shot.sigma[j] = forms.sites[j].evaluate(assignment) ? std::int8_t{-1} : std::int8_t{1};
  apply_noise(shot, p_s, p_sigma, rng);
}

std::vector<Shot> tableau_sample(const ProtocolForms& forms, double p_s, double p_sigma,
                                 std::size_t shots, Rng& rng) {
  std::vector<Shot> out(shots);
  std::vector<std::uint64_t> assignment;
  for (auto& shot : out) tableau_sample_into(forms, p_s, p_sigma, rng, shot, assignment);
  return out;
}

Eigen::VectorXd tableau_distribution(const CliffordProtocol& protocol) {
  const auto& geom = protocol.geometry();
  if (geom.num_qubits() > 24) throw std::invalid_argument("tableau_distribution: too many qubits");
  const ProtocolForms f = protocol.forms();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << geom.num_qubits());
  const double weight = std::ldexp(1.0, -f.num_coins);
  std::vector<std::uint64_t> assignment(static_cast<std::size_t>(f.sign_words), 0);
  Spins sigma(geom.num_sites()), s(geom.num_bonds());
  for (std::uint64_t coins = 0; coins < (std::uint64_t{1} << f.num_coins); ++coins) {
    std::fill(assignment.begin(), assignment.end(), 0);
    // coin c occupies bit c of the assignment
    for (int c = 1; c <= f.num_coins; ++c)
      if ((coins >> (c - 1)) & 1) assignment[c / 64] |= std::uint64_t{1} << (c % 64);
    assignment[0] |= 1;
    for (int b = 0; b < geom.num_bonds(); ++b)
      s[b] = f.syndromes[b].evaluate(assignment) ? std::int8_t{-1} : std::int8_t{1};
    for (int j = 0; j < geom.num_sites(); ++j)
      sigma[j] = f.sites[j].evaluate(assignment) ? std::int8_t{-1} : std::int8_t{1};
    p[static_cast<Eigen::Index>(outcome_index(geom, sigma, s))] += weight;
  }
  return p;
}

}  // namespace nishimori::oracle
