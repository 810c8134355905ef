#pragma once

#include <Eigen/Core>
#include <complex>
#include <ostream>

#include "nishimori/oracles/circuit.hpp"

namespace nishimori::oracle {

inline constexpr int kMaxStatevectorQubits = 24;

/// Dense statevector over n qubits; basis index bit q is qubit q.
template <typename Scalar>
class Statevector {
 public:
  using Complex = std::complex<Scalar>;
  using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  explicit Statevector(int num_qubits);

  int num_qubits() const { return n_; }
  const Vector& amplitudes() const { return amp_; }

  /// Resets to |+>^n.
  void set_plus();
  void apply_h(int q);
  /// exp(-i angle Z_a Z_b).
  void apply_zz(int a, int b, Scalar angle);
  /// |amplitude|^2 per basis index.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> probabilities() const;

 private:
  int n_;
  Vector amp_;
};

/// Exact joint distribution of all terminal outcomes of the protocol circuit,
/// indexed by outcome_index(). Throws for more than kMaxStatevectorQubits.
Eigen::VectorXd statevector_distribution(const CircuitSpec& spec);

/// Same table computed from the sampler's closed form.
Eigen::VectorXd closed_form_distribution(const LatticeGeometry& geom, double t_a);

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// "bitstring probability" lines; qubit 0 is the leftmost character, sites first.
void write_distribution(std::ostream& os, const Eigen::VectorXd& probs, int num_qubits);

extern template class Statevector<double>;
extern template class Statevector<float>;

}  // namespace nishimori::oracle
