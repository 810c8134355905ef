#include "nishimori/oracles/circuit.hpp"

#include <stdexcept>

namespace nishimori::oracle {

CircuitSpec build_circuit(const LatticeGeometry& geom, double t_a) {
  const int n = geom.num_sites();
  const int nq = geom.num_qubits();

  struct Edge {
    int site;
    int aux;  // qubit index
    int bond;
  };
  std::vector<Edge> edges;
  for (int b = 0; b < geom.num_bonds(); ++b) {
    edges.push_back({geom.bond(b).site_a, n + b, b});
    edges.push_back({geom.bond(b).site_b, n + b, b});
  }
  std::vector<std::array<int, 3>> at(nq, {-1, -1, -1});
  std::vector<int> colour(edges.size(), -1);
  auto other = [&](int e, int x) { return edges[e].site == x ? edges[e].aux : edges[e].site; };
  auto free_colour = [&](int x) {
    for (int c = 0; c < 3; ++c)
      if (at[x][c] < 0) return c;
    throw std::logic_error("build_circuit: vertex degree exceeds 3");
  };

  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const int u = edges[e].site;
    const int v = edges[e].aux;
    const int a = free_colour(u);
    const int b = free_colour(v);
    if (at[v][a] >= 0) {
      // Swap colours a/b along the alternating path from v; it cannot reach u.
      std::vector<int> path;
      int x = v;
      int c = a;
      while (at[x][c] >= 0) {
        const int f = at[x][c];
        path.push_back(f);
        x = other(f, x);
        c = (c == a) ? b : a;
      }
      for (int f : path) {
        at[edges[f].site][colour[f]] = -1;
        at[edges[f].aux][colour[f]] = -1;
      }
      for (int f : path) {
        colour[f] = (colour[f] == a) ? b : a;
        at[edges[f].site][colour[f]] = f;
        at[edges[f].aux][colour[f]] = f;
      }
    }
    colour[e] = a;
    at[u][a] = e;
    at[v][a] = e;
  }

  CircuitSpec spec;
  spec.geom = &geom;
  spec.t_a = t_a;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double angle = geom.sublattice(edges[e].site) == 0 ? t_a : kQuarterPi;
    spec.layers[colour[e]].push_back({edges[e].site, edges[e].bond, angle});
  }
  return spec;
}

std::size_t outcome_index(const LatticeGeometry& geom, const Spins& sigma, const Spins& s) {
  const int n = geom.num_sites();
  std::size_t idx = 0;
  for (int j = 0; j < n; ++j)
    if (sigma[j] < 0) idx |= std::size_t{1} << j;
  for (int b = 0; b < geom.num_bonds(); ++b)
    if (s[b] > 0) idx |= std::size_t{1} << (n + b);
  return idx;
}

void decode_outcome(const LatticeGeometry& geom, std::size_t index, Spins& sigma, Spins& s) {
  const int n = geom.num_sites();
  sigma.resize(n);
  s.resize(geom.num_bonds());
  for (int j = 0; j < n; ++j) sigma[j] = (index >> j) & 1 ? std::int8_t{-1} : std::int8_t{1};
  for (int b = 0; b < geom.num_bonds(); ++b)
    s[b] = (index >> (n + b)) & 1 ? std::int8_t{1} : std::int8_t{-1};
}

}  // namespace nishimori::oracle
