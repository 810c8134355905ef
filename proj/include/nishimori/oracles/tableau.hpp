#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "nishimori/born_sampler.hpp"
#include "nishimori/oracles/circuit.hpp"
#include "nishimori/rng.hpp"

namespace nishimori::oracle {

/// A measurement outcome as an affine function of fair coins:
/// bit = parity(words & assignment), where bit 0 of an assignment is always 1
/// (the constant term) and bit c is coin c.
struct AffineBit {
  std::vector<std::uint64_t> words;

  bool evaluate(std::span<const std::uint64_t> assignment) const;
};

/// Aaronson-Gottesman stabilizer tableau whose row signs are tracked as affine
/// forms over the random measurement outcomes, so one symbolic run describes
/// the whole outcome distribution.
class AffineTableau {
 public:
  AffineTableau(int num_qubits, int max_coins);

  int num_qubits() const { return n_; }
  int num_coins() const { return coins_; }
  int sign_words() const { return sw_; }

  void h(int q);
  void s(int q);
  void s_dag(int q);
  void cx(int control, int target);
  void cz(int a, int b);
  AffineBit measure_z(int q);

 private:
  bool x(int row, int q) const { return (x_[row * w_ + q / 64] >> (q % 64)) & 1; }
  bool z(int row, int q) const { return (z_[row * w_ + q / 64] >> (q % 64)) & 1; }
  void flip_const(int row) { r_[row * sw_] ^= 1; }
  void rowsum(int h, int i);
  void copy_row(int dst, int src);
  void clear_row(int row);

  int n_;
  int w_;   // words per Pauli row
  int sw_;  // words per sign form
  int max_coins_;
  int coins_ = 0;
  std::vector<std::uint64_t> x_, z_, r_;  // 2n + 1 rows, last one scratch
};

enum class PauliBasis : char { Z = 'Z', X = 'X', Y = 'Y' };

/// Outcome forms for one measurement setting of the Clifford-point protocol.
struct ProtocolForms {
  std::vector<AffineBit> syndromes;  // bit 1 means s = -1 (internal convention)
  std::vector<AffineBit> sites;      // bit 1 means the site read -1 in its basis
  int num_coins = 0;
  int sign_words = 0;
};

/// The t_A = pi/4 protocol as a stabilizer circuit. Each ZZ(pi/2) coupling is
/// realised as CZ (they differ by single-qubit S-type frame gates), so an
/// auxiliary X outcome of +1 means its two sites are parallel and the
/// post-measurement system state is GHZ up to X flips.
class CliffordProtocol {
 public:
  /// Throws std::invalid_argument unless spec.t_a == pi/4.
  explicit CliffordProtocol(const CircuitSpec& spec);

  const LatticeGeometry& geometry() const { return *geom_; }

  /// Forms with every site read in Z.
  ProtocolForms forms() const;
  /// Forms with site j read in basis[j].
  ProtocolForms forms(std::span<const PauliBasis> basis) const;

 private:
  const LatticeGeometry* geom_;
  std::vector<AffineBit> syndromes_;  // filled while after_syndromes_ is built
  AffineTableau after_syndromes_;
};

/// Draws noisy shots from the forms: s and sigma hold the ideal outcomes,
/// s_prime flips each syndrome with p_s, sigma_readout flips each site with p_sigma.
std::vector<Shot> tableau_sample(const ProtocolForms& forms, double p_s, double p_sigma,
                                 std::size_t shots, Rng& rng);
void tableau_sample_into(const ProtocolForms& forms, double p_s, double p_sigma, Rng& rng,
                         Shot& shot, std::vector<std::uint64_t>& assignment);

/// Exact outcome table of the all-Z setting, indexed like statevector_distribution.
Eigen::VectorXd tableau_distribution(const CliffordProtocol& protocol);

}  // namespace nishimori::oracle
