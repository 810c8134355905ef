#include "nishimori/geometry.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace nishimori {

std::string to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::chain:
      return "chain";
    case LatticeKind::brickwall:
      return "brickwall";
    case LatticeKind::hexagon:
      return "hexagon";
  }
  return "unknown";
}

void LatticeGeometry::finalize() {
  const int nb = num_bonds();
  for (int b = 0; b < nb; ++b) bonds_[b].aux_id = num_sites_ + b;

  site_adj_.assign(num_sites_, {});
  for (int b = 0; b < nb; ++b) {
    const auto& bd = bonds_[b];
    if (bd.site_a == bd.site_b) throw std::logic_error("self-loop bond");
    site_adj_[bd.site_a].emplace_back(bd.site_b, b);
    site_adj_[bd.site_b].emplace_back(bd.site_a, b);
  }

  bond_faces_.assign(nb, {});
  for (int p = 0; p < num_plaquettes(); ++p)
    for (int b : plaquettes_[p]) bond_faces_[b].push_back(p);

  dual_adj_.assign(num_dual_nodes(), {});
  for (int b = 0; b < nb; ++b) {
    const auto& faces = bond_faces_[b];
    if (faces.size() == 2) {
      dual_adj_[faces[0]].push_back({faces[1], b});
      dual_adj_[faces[1]].push_back({faces[0], b});
    } else if (faces.size() == 1) {
      dual_adj_[faces[0]].push_back({boundary_node(), b});
      dual_adj_[boundary_node()].push_back({faces[0], b});
    }
  }
  for (auto& adj : dual_adj_)
    std::sort(adj.begin(), adj.end(), [](const DualEdge& x, const DualEdge& y) {
      return x.node != y.node ? x.node < y.node : x.bond < y.bond;
    });

  // Two-colouring; every generated lattice is bipartite.
  sublattice_.assign(num_sites_, -1);
  std::deque<int> queue{0};
  sublattice_[0] = 0;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (auto [t, b] : site_adj_[s]) {
      if (sublattice_[t] < 0) {
        sublattice_[t] = 1 - sublattice_[s];
        queue.push_back(t);
      } else if (sublattice_[t] == sublattice_[s]) {
        throw std::logic_error("lattice is not bipartite");
      }
    }
  }
}

LatticeGeometry build_brickwall(int ly) {
  if (ly < 2) throw std::invalid_argument("build_brickwall: L_y must be >= 2");
  const int rows = 2 * (ly - 1);
  const int cols = 2 * ly + 1;
  auto site = [cols](int r, int c) { return r * cols + c; };

  LatticeGeometry g;
  g.kind_ = LatticeKind::brickwall;
  g.size_param_ = ly;
  g.num_sites_ = rows * cols;

  // horizontal[r][c] joins (r,c)-(r,c+1); vertical[r][c] joins (r,c)-(r+1,c)
  // and exists when c has the parity of r.
  std::vector<std::vector<int>> horizontal(rows, std::vector<int>(cols - 1, -1));
  std::vector<std::vector<int>> vertical(rows, std::vector<int>(cols, -1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      horizontal[r][c] = static_cast<int>(g.bonds_.size());
      g.bonds_.push_back({site(r, c), site(r, c + 1), -1});
    }
    if (r + 1 < rows) {
      for (int c = r % 2; c < cols; c += 2) {
        vertical[r][c] = static_cast<int>(g.bonds_.size());
        g.bonds_.push_back({site(r, c), site(r + 1, c), -1});
      }
    }
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = r % 2; c + 2 < cols; c += 2) {
      g.plaquettes_.push_back({horizontal[r][c], horizontal[r][c + 1], vertical[r][c + 2],
                               horizontal[r + 1][c + 1], horizontal[r + 1][c], vertical[r][c]});
    }
  }
  g.finalize();
  return g;
}

LatticeGeometry build_chain(int n) {
  if (n < 2) throw std::invalid_argument("build_chain: N must be >= 2");
  LatticeGeometry g;
  g.kind_ = LatticeKind::chain;
  g.size_param_ = n;
  g.num_sites_ = n;
  for (int j = 0; j + 1 < n; ++j) g.bonds_.push_back({j, j + 1, -1});
  g.finalize();
  return g;
}

LatticeGeometry build_hexagon() {
  LatticeGeometry g;
  g.kind_ = LatticeKind::hexagon;
  g.size_param_ = 1;
  g.num_sites_ = 6;
  for (int j = 0; j < 5; ++j) g.bonds_.push_back({j, j + 1, -1});
  g.bonds_.push_back({0, 5, -1});
  g.plaquettes_.push_back({0, 1, 2, 3, 4, 5});
  g.finalize();
  return g;
}

std::string LatticeGeometry::serialize() const {
  std::ostringstream os;
  os << "# nishimori-geometry v1\n";
  os << "kind " << to_string(kind_) << "\n";
  os << "size " << size_param_ << "\n";
  os << "sites " << num_sites_ << "\n";
  os << "bonds " << num_bonds() << "\n";
  for (const auto& b : bonds_) os << b.site_a << ' ' << b.site_b << ' ' << b.aux_id << '\n';
  os << "plaquettes " << num_plaquettes() << "\n";
  for (const auto& p : plaquettes_) {
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << p[i];
    os << '\n';
  }
  return os.str();
}

std::uint64_t LatticeGeometry::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DualDistances::DualDistances(const LatticeGeometry& geom) {
  const int n = geom.num_dual_nodes();
  dist_ = Eigen::MatrixXi::Constant(n, n, -1);
  next_bond_ = Eigen::MatrixXi::Constant(n, n, -1);
  next_node_ = Eigen::MatrixXi::Constant(n, n, -1);
  std::vector<int> queue;
  queue.reserve(n);
  for (int target = 0; target < n; ++target) {
    queue.clear();
    queue.push_back(target);
    dist_(target, target) = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (const auto& e : geom.dual_neighbors(u)) {
        if (dist_(e.node, target) >= 0) continue;
        dist_(e.node, target) = dist_(u, target) + 1;
        next_node_(e.node, target) = u;
        next_bond_(e.node, target) = e.bond;
        queue.push_back(e.node);
      }
    }
  }
}

std::vector<int> DualDistances::path(int from, int to) const {
  std::vector<int> bonds;
  bonds.reserve(static_cast<std::size_t>(std::max(0, dist_(from, to))));
  while (from != to) {
    bonds.push_back(next_bond_(from, to));
    from = next_node_(from, to);
  }
  return bonds;
}

DualDistances defect_distances(const LatticeGeometry& geom) {
  if (!geom.is_2d()) throw std::invalid_argument("defect_distances: chain has no plaquettes");
  return DualDistances(geom);
}

}  // namespace nishimori
