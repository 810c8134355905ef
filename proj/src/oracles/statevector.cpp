#include "nishimori/oracles/statevector.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "nishimori/born_sampler.hpp"

namespace nishimori::oracle {

template <typename Scalar>
Statevector<Scalar>::Statevector(int num_qubits) : n_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxStatevectorQubits)
    throw std::invalid_argument("Statevector: qubit count out of range");
  amp_.resize(Eigen::Index{1} << n_);
  set_plus();
}

template <typename Scalar>
void Statevector<Scalar>::set_plus() {
  amp_.setConstant(Complex(std::pow(Scalar(2), Scalar(-0.5) * static_cast<Scalar>(n_)), 0));
}

template <typename Scalar>
void Statevector<Scalar>::apply_h(int q) {
  const Eigen::Index stride = Eigen::Index{1} << q;
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  for (Eigen::Index base = 0; base < amp_.size(); base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      const Complex a0 = amp_[i];
      const Complex a1 = amp_[i + stride];
      amp_[i] = r * (a0 + a1);
      amp_[i + stride] = r * (a0 - a1);
    }
  }
}

template <typename Scalar>
void Statevector<Scalar>::apply_zz(int a, int b, Scalar angle) {
  const Complex same = std::polar(Scalar(1), -angle);
  const Complex diff = std::polar(Scalar(1), angle);
  for (Eigen::Index i = 0; i < amp_.size(); ++i) {
    const bool parity = (((i >> a) ^ (i >> b)) & 1) != 0;
    amp_[i] *= parity ? diff : same;
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> Statevector<Scalar>::probabilities() const {
  return amp_.cwiseAbs2();
}

template class Statevector<double>;
template class Statevector<float>;

Eigen::VectorXd statevector_distribution(const CircuitSpec& spec) {
  const auto& geom = *spec.geom;
  const int n = geom.num_sites();
  if (geom.num_qubits() > kMaxStatevectorQubits)
    throw std::invalid_argument("statevector_distribution: too many qubits");
  Statevector<double> psi(geom.num_qubits());
  for (const auto& layer : spec.layers)
    for (const auto& c : layer) psi.apply_zz(c.site, n + c.bond, c.angle);
  for (int b = 0; b < geom.num_bonds(); ++b) psi.apply_h(n + b);
  Eigen::VectorXd p = psi.probabilities();
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] < 0.0) p[i] = 0.0;
  return p;
}

Eigen::VectorXd closed_form_distribution(const LatticeGeometry& geom, double t_a) {
  if (geom.num_qubits() > kMaxStatevectorQubits)
    throw std::invalid_argument("closed_form_distribution: too many qubits");
  Eigen::VectorXd p(Eigen::Index{1} << geom.num_qubits());
  Spins sigma, s;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    decode_outcome(geom, static_cast<std::size_t>(i), sigma, s);
    p[i] = exact_joint_probability(geom, t_a, sigma, s);
  }
  return p;
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

void write_distribution(std::ostream& os, const Eigen::VectorXd& probs, int num_qubits) {
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    for (int q = 0; q < num_qubits; ++q) os << (((i >> q) & 1) ? '1' : '0');
    os << ' ' << probs[i] << '\n';
  }
}

}  // namespace nishimori::oracle
