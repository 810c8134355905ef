#include <set>

#include "doctest.h"
#include "nishimori/geometry.hpp"

using namespace nishimori;

TEST_CASE("brickwall qubit totals match the device layouts") {
  const int expected[][3] = {{2, 10, 21}, {3, 28, 63}, {4, 54, 125}};
  for (const auto& e : expected) {
    const auto g = build_brickwall(e[0]);
    CHECK(g.num_sites() == e[1]);
    CHECK(g.num_qubits() == e[2]);
  }
}

TEST_CASE("plaquette counts and Euler characteristic") {
  CHECK(build_brickwall(2).num_plaquettes() == 2);
  CHECK(build_brickwall(3).num_plaquettes() == 8);
  CHECK(build_brickwall(4).num_plaquettes() == 18);
  CHECK(build_brickwall(4).num_bonds() == 71);
  for (int ly = 2; ly <= 6; ++ly) {
    const auto g = build_brickwall(ly);
    // planar patch, one outer face: V - E + F_inner = 1
    CHECK(g.num_sites() - g.num_bonds() + g.num_plaquettes() == 1);
  }
}

TEST_CASE("bond and face invariants") {
  for (int ly = 2; ly <= 5; ++ly) {
    const auto g = build_brickwall(ly);
    std::set<int> aux;
    int interior = 0, boundary = 0, memberships = 0;
    for (int b = 0; b < g.num_bonds(); ++b) {
      const auto& bd = g.bond(b);
      CHECK(bd.site_a != bd.site_b);
      CHECK(bd.aux_id == g.num_sites() + b);
      aux.insert(bd.aux_id);
      const auto nf = g.bond_faces(b).size();
      CHECK(nf <= 2);
      if (nf == 2) ++interior;
      if (nf == 1) ++boundary;
    }
    CHECK(static_cast<int>(aux.size()) == g.num_bonds());
    for (const auto& p : g.plaquettes()) {
      CHECK(p.size() == 6);
      memberships += static_cast<int>(p.size());
      // each plaquette is a closed 6-cycle: every site on it has degree 2 within it
      std::multiset<int> sites;
      for (int b : p) {
        sites.insert(g.bond(b).site_a);
        sites.insert(g.bond(b).site_b);
      }
      for (int s : sites) CHECK(sites.count(s) == 2);
    }
    CHECK(memberships == 2 * interior + boundary);
  }
  const auto g4 = build_brickwall(4);
  int interior = 0;
  for (int b = 0; b < g4.num_bonds(); ++b) interior += g4.bond_faces(b).size() == 2;
  CHECK(interior == 37);
}

TEST_CASE("every site has degree at most 3 and the lattice is bipartite") {
  const auto g = build_brickwall(4);
  for (int s = 0; s < g.num_sites(); ++s) {
    CHECK(g.site_neighbors(s).size() <= 3);
    for (auto [t, b] : g.site_neighbors(s)) CHECK(g.sublattice(t) != g.sublattice(s));
  }
  CHECK(g.sublattice(0) == 0);
}

TEST_CASE("chains") {
  const auto c2 = build_chain(2);
  CHECK(c2.num_bonds() == 1);
  CHECK(c2.num_qubits() == 3);
  CHECK(build_chain(54).num_bonds() == 53);
  CHECK(build_chain(54).num_qubits() == 107);
  CHECK(build_chain(28).num_plaquettes() == 0);
  CHECK_FALSE(c2.is_2d());
}

TEST_CASE("invalid sizes are rejected") {
  CHECK_THROWS_AS(build_brickwall(1), std::invalid_argument);
  CHECK_THROWS_AS(build_brickwall(0), std::invalid_argument);
  CHECK_THROWS_AS(build_chain(1), std::invalid_argument);
  CHECK_THROWS_AS(defect_distances(build_chain(5)), std::invalid_argument);
}

TEST_CASE("serialization is deterministic") {
  CHECK(build_brickwall(3).serialize() == build_brickwall(3).serialize());
  CHECK(build_brickwall(3).hash() == build_brickwall(3).hash());
  CHECK(build_brickwall(3).hash() != build_brickwall(4).hash());
  const auto text = build_brickwall(2).serialize();
  CHECK(text.find("0 1 10\n") != std::string::npos);
  CHECK(text.find("plaquettes 2\n") != std::string::npos);
}

TEST_CASE("dual distances") {
  const auto g = build_brickwall(4);
  const auto d = defect_distances(g);
  const int nodes = g.num_dual_nodes();
  int total = 0, max_to_boundary = 0;
  for (int a = 0; a < nodes; ++a) {
    CHECK(d.distance(a, a) == 0);
    for (int b = 0; b < nodes; ++b) {
      CHECK(d.distance(a, b) == d.distance(b, a));
      total += d.distance(a, b);
      for (int c = 0; c < nodes; ++c) CHECK(d.distance(a, c) <= d.distance(a, b) + d.distance(b, c));
    }
  }
  for (int p = 0; p < g.num_plaquettes(); ++p)
    max_to_boundary = std::max(max_to_boundary, d.distance(p, g.boundary_node()));
  // frozen from an independent networkx BFS on the serialized geometry
  CHECK(max_to_boundary == 2);
  CHECK(total == 606);

  // plaquettes sharing a bond are at distance 1
  for (int b = 0; b < g.num_bonds(); ++b)
    if (g.bond_faces(b).size() == 2) CHECK(d.distance(g.bond_faces(b)[0], g.bond_faces(b)[1]) == 1);

  // a reconstructed path has the right length and ends where it should
  for (int a = 0; a < nodes; ++a) {
    for (int b = 0; b < nodes; ++b) {
      const auto path = d.path(a, b);
      CHECK(static_cast<int>(path.size()) == d.distance(a, b));
    }
  }
}
