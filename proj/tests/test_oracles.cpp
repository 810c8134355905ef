#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "nishimori/born_sampler.hpp"
#include "nishimori/oracles/brute_force.hpp"
#include "nishimori/oracles/circuit.hpp"
#include "nishimori/oracles/exhaustive_matching.hpp"
#include "nishimori/oracles/statevector.hpp"
#include "nishimori/oracles/tableau.hpp"

using namespace nishimori;
using namespace nishimori::oracle;

namespace {

const double kAngles[] = {0.0, kPi / 8, kPi / 6, kQuarterPi};

}  // namespace

TEST_CASE("circuit schedule covers every coupling once, one gate per qubit per layer") {
  for (const auto& g : {build_chain(2), build_hexagon(), build_brickwall(2), build_brickwall(4)}) {
    const auto spec = build_circuit(g, kPi / 8);
    std::multiset<std::pair<int, int>> seen;
    for (const auto& layer : spec.layers) {
      std::set<int> touched;
      for (const auto& c : layer) {
        CHECK(touched.insert(c.site).second);
        CHECK(touched.insert(g.num_sites() + c.bond).second);
        seen.insert({c.site, c.bond});
        CHECK(c.angle == (g.sublattice(c.site) == 0 ? kPi / 8 : kQuarterPi));
      }
    }
    CHECK(static_cast<int>(seen.size()) == 2 * g.num_bonds());
    for (int b = 0; b < g.num_bonds(); ++b) {
      CHECK(seen.count({g.bond(b).site_a, b}) == 1);
      CHECK(seen.count({g.bond(b).site_b, b}) == 1);
    }
  }
}

TEST_CASE("single bond distributions") {
  const auto g = build_chain(2);
  const auto p0 = statevector_distribution(build_circuit(g, 0.0));
  REQUIRE(p0.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(p0[i] == doctest::Approx(0.125).epsilon(1e-14));

  const auto p1 = statevector_distribution(build_circuit(g, kQuarterPi));
  int support = 0;
  for (int i = 0; i < 8; ++i) {
    if (p1[i] > 1e-12) {
      ++support;
      CHECK(p1[i] == doctest::Approx(0.25).epsilon(1e-14));
      Spins sigma, s;
      decode_outcome(g, static_cast<std::size_t>(i), sigma, s);
      CHECK(s[0] == sigma[0] * sigma[1]);
    }
  }
  CHECK(support == 4);
}

TEST_CASE("statevector matches the sampler closed form exactly") {
  for (const auto& g : {build_chain(2), build_hexagon(), build_brickwall(2)}) {
    for (double t : kAngles) {
      const auto sv = statevector_distribution(build_circuit(g, t));
      const auto cf = closed_form_distribution(g, t);
      CHECK(sv.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(sv.minCoeff() >= 0.0);
      CHECK(total_variation(sv, cf) < 1e-10);
    }
  }
}

TEST_CASE("layer order does not change the distribution") {
  const auto g = build_hexagon();
  auto spec = build_circuit(g, kPi / 6);
  const auto ref = statevector_distribution(spec);
  std::array<int, 3> order{0, 1, 2};
  while (std::next_permutation(order.begin(), order.end())) {
    CircuitSpec perm = spec;
    for (int i = 0; i < 3; ++i) perm.layers[i] = spec.layers[order[i]];
    CHECK((statevector_distribution(perm) - ref).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("statevector rejects oversized instances") {
  CHECK_THROWS_AS(statevector_distribution(build_circuit(build_brickwall(3), 0.1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(Statevector<double>(25), std::invalid_argument);
}

TEST_CASE("tableau and statevector agree at the Clifford point") {
  for (const auto& g : {build_chain(2), build_chain(5), build_hexagon(), build_brickwall(2)}) {
    const auto spec = build_circuit(g, kQuarterPi);
    const CliffordProtocol protocol(spec);
    const auto tab = tableau_distribution(protocol);
    const auto sv = statevector_distribution(spec);
    CHECK(total_variation(tab, sv) < 1e-12);
  }
}

TEST_CASE("tableau rejects non-Clifford angles") {
  const auto g = build_hexagon();
  CHECK_THROWS_AS(CliffordProtocol(build_circuit(g, kPi / 8)), std::invalid_argument);
}

TEST_CASE("tableau scales to the largest patch") {
  const auto g = build_brickwall(4);
  const CliffordProtocol protocol(build_circuit(g, kQuarterPi));
  const auto forms = protocol.forms();
  // N - 1 independent syndromes (one per spanning-tree bond) plus the GHZ sector
  CHECK(forms.num_coins == g.num_sites());
  Rng rng(1);
  for (const auto& shot : tableau_sample(forms, 0.0, 0.0, 50, rng)) {
    for (int b = 0; b < g.num_bonds(); ++b)
      CHECK(shot.s[b] == shot.sigma[g.bond(b).site_a] * shot.sigma[g.bond(b).site_b]);
  }
}

TEST_CASE("fully scrambled readout kills Z parities") {
  const auto g = build_brickwall(2);
  const CliffordProtocol protocol(build_circuit(g, kQuarterPi));
  const auto forms = protocol.forms();
  Rng rng(8);
  const int n = 40000;
  long parity01 = 0, parity_single = 0;
  for (const auto& shot : tableau_sample(forms, 0.0, 0.5, n, rng)) {
    parity01 += shot.sigma_readout[0] * shot.sigma_readout[1];
    parity_single += shot.sigma_readout[3];
  }
  CHECK(std::abs(parity01 / double(n)) < 4 / std::sqrt(double(n)));
  CHECK(std::abs(parity_single / double(n)) < 4 / std::sqrt(double(n)));
}

TEST_CASE("write_distribution format") {
  Eigen::VectorXd p(4);
  p << 0.5, 0.25, 0.0, 0.25;
  std::ostringstream os;
  write_distribution(os, p, 2);
  CHECK(os.str() == "00 0.5\n10 0.25\n01 0\n11 0.25\n");
}

TEST_CASE("brute force ground states") {
  const auto g = build_brickwall(2);
  const auto gs = brute_force_ground_state(g, Spins::Ones(g.num_bonds()));
  CHECK(gs.energy == -g.num_bonds());
  CHECK(gs.sigma == Spins::Ones(g.num_sites()));

  const auto chain = build_chain(12);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    Spins j(chain.num_bonds());
    for (int b = 0; b < j.size(); ++b) j[b] = rng.bernoulli(0.5) ? -1 : 1;
    const auto r = brute_force_ground_state(chain, j);
    CHECK(r.energy == -chain.num_bonds());
    CHECK(r.sigma[0] == 1);
  }

  // a single antiferromagnetic bond on a hexagon frustrates it: E = -6 + 2
  Spins j = Spins::Ones(6);
  j[2] = -1;
  CHECK(brute_force_ground_state(build_hexagon(), j).energy == -4);
  CHECK_THROWS_AS(brute_force_ground_state(build_chain(25), Spins::Ones(24)), std::invalid_argument);
}

TEST_CASE("exhaustive matching") {
  const auto none = exhaustive_matching(Eigen::MatrixXi(0, 0), Eigen::VectorXi(0));
  CHECK(none.weight == 0);
  CHECK(none.pairs.empty());

  Eigen::MatrixXi c(2, 2);
  c << 0, 1, 1, 0;
  Eigen::VectorXi bd(2);
  bd << 2, 2;
  auto m = exhaustive_matching(c, bd);
  CHECK(m.weight == 1);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].second == 1);

  bd << 0, 0;  // both on the boundary is cheaper
  m = exhaustive_matching(c, bd);
  CHECK(m.weight == 0);
  CHECK(m.pairs.size() == 2);

  CHECK_THROWS_AS(exhaustive_matching(Eigen::MatrixXi::Zero(13, 13), Eigen::VectorXi::Zero(13)),
                  std::invalid_argument);
}
