#include "nishimori/decoder.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace nishimori {

std::vector<int> frustration(const LatticeGeometry& geom, const Spins& s_prime) {
  if (!geom.is_2d()) throw std::invalid_argument("frustration: chain geometry has no plaquettes");
  std::vector<int> defects;
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    int prod = 1;
    for (int b : geom.plaquette(p)) prod *= s_prime[b];
    if (prod < 0) defects.push_back(p);
  }
  return defects;
}

int ising_energy(const LatticeGeometry& geom, const Spins& couplings, const Spins& sigma) {
  int e = 0;
  for (int b = 0; b < geom.num_bonds(); ++b) {
    const auto& bd = geom.bond(b);
    e -= couplings[b] * sigma[bd.site_a] * sigma[bd.site_b];
  }
  return e;
}

namespace {

// Spanning tree of the site graph from site 0; shared by both decoders.
void spanning_tree(const LatticeGeometry& geom, std::vector<int>& order, std::vector<int>& parent,
                   std::vector<int>& parent_bond) {
  const int n = geom.num_sites();
  order.clear();
  parent.assign(n, -1);
  parent_bond.assign(n, -1);
  std::vector<char> seen(n, 0);
  order.push_back(0);
  seen[0] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int s = order[head];
    for (auto [t, b] : geom.site_neighbors(s)) {
      if (seen[t]) continue;
      seen[t] = 1;
      parent[t] = s;
      parent_bond[t] = b;
      order.push_back(t);
    }
  }
  if (static_cast<int>(order.size()) != n) throw std::logic_error("lattice is disconnected");
}

}  // namespace

Decoder::Decoder(const LatticeGeometry& geom) : geom_(&geom), dist_(defect_distances(geom)) {
  spanning_tree(geom, tree_order_, tree_parent_, tree_bond_);
  flip_.assign(geom.num_bonds(), 0);
}

void Decoder::run(const Spins& s_prime, bool keep_details) {
  const auto& geom = *geom_;
  defects_.clear();
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    int prod = 1;
    for (int b : geom.plaquette(p)) prod *= s_prime[b];
    if (prod < 0) defects_.push_back(p);
  }
  const int k = static_cast<int>(defects_.size());
  const int boundary = dist_.boundary_node();

  matched_.pairs.clear();
  matched_.weight = 0;
  if (k == 1) {
    matched_.pairs.push_back({0, -1});
    matched_.weight = dist_.distance(defects_[0], boundary);
  } else if (k == 2) {
    const int d = dist_.distance(defects_[0], defects_[1]);
    const int via = dist_.distance(defects_[0], boundary) + dist_.distance(defects_[1], boundary);
    if (d <= via) {
      matched_.pairs.push_back({0, 1});
      matched_.weight = d;
    } else {
      matched_.pairs.push_back({0, -1});
      matched_.pairs.push_back({1, -1});
      matched_.weight = via;
    }
  } else if (k > 2) {
    Eigen::MatrixXi pair_cost(k, k);
    Eigen::VectorXi boundary_cost(k);
    for (int i = 0; i < k; ++i) {
      boundary_cost[i] = dist_.distance(defects_[i], boundary);
      for (int j = 0; j < k; ++j) pair_cost(i, j) = dist_.distance(defects_[i], defects_[j]);
    }
    matched_ = match_with_boundary(pair_cost, boundary_cost, matcher_);
  }

  std::fill(flip_.begin(), flip_.end(), 0);
  for (const auto& pr : matched_.pairs) {
    int from = defects_[pr.first];
    const int to = pr.second < 0 ? boundary : defects_[pr.second];
    while (from != to) {
      flip_[dist_.next_bond(from, to)] ^= 1;
      from = dist_.next_node(from, to);
    }
  }

  const int n = geom.num_sites();
  sigma_.resize(n);
  sigma_[0] = 1;
  for (std::size_t idx = 1; idx < tree_order_.size(); ++idx) {
    const int s = tree_order_[idx];
    const int b = tree_bond_[s];
    const int j = flip_[b] ? -s_prime[b] : s_prime[b];
    sigma_[s] = static_cast<std::int8_t>(sigma_[tree_parent_[s]] * j);
  }

  if (verify || keep_details) {
    for (int b = 0; b < geom.num_bonds(); ++b) {
      const auto& bd = geom.bond(b);
      const int j = flip_[b] ? -s_prime[b] : s_prime[b];
      if (j * sigma_[bd.site_a] * sigma_[bd.site_b] != 1)
        throw std::logic_error("decoder: corrected couplings remain frustrated");
    }
  }
}

void Decoder::decode_into(const Spins& s_prime, Spins& sigma_prime) {
  run(s_prime, false);
  sigma_prime = sigma_;
}

DecodeResult Decoder::decode(const Spins& s_prime) {
  run(s_prime, true);
  DecodeResult r;
  r.sigma_prime = sigma_;
  for (const auto& pr : matched_.pairs)
    r.matching.push_back({defects_[pr.first],
                          pr.second < 0 ? dist_.boundary_node() : defects_[pr.second]});
  for (int b = 0; b < geometry().num_bonds(); ++b)
    if (flip_[b]) r.flipped_bonds.push_back(b);
  r.energy = ising_energy(geometry(), s_prime, sigma_);
  r.matching_weight = matched_.weight;
  return r;
}

std::string Decoder::trace(const DecodeResult& r) {
  std::ostringstream os;
  os << "pairs";
  for (const auto& p : r.matching) os << ' ' << p.first << '-' << p.second;
  os << " | flipped";
  for (int b : r.flipped_bonds) os << ' ' << b;
  os << " | weight " << r.matching_weight << " energy " << r.energy;
  return os.str();
}

DecodeResult decode_chain(const LatticeGeometry& geom, const Spins& s_prime) {
  if (geom.is_2d()) throw std::invalid_argument("decode_chain: expects a chain geometry");
  DecodeResult r;
  const int n = geom.num_sites();
  r.sigma_prime.resize(n);
  r.sigma_prime[0] = 1;
  for (int j = 0; j + 1 < n; ++j)
    r.sigma_prime[j + 1] = static_cast<std::int8_t>(r.sigma_prime[j] * s_prime[j]);
  r.energy = ising_energy(geom, s_prime, r.sigma_prime);
  return r;
}

ReplicaDecoder::ReplicaDecoder(const LatticeGeometry& geom) : geom_(&geom) {
  if (geom.is_2d()) decoder_ = std::make_unique<Decoder>(geom);
}

ReplicaDecoder::~ReplicaDecoder() = default;

void ReplicaDecoder::operator()(const Spins& s_prime, Spins& sigma_prime) {
  if (decoder_) {
    decoder_->decode_into(s_prime, sigma_prime);
    return;
  }
  const int n = geom_->num_sites();
  sigma_prime.resize(n);
  sigma_prime[0] = 1;
  for (int j = 0; j + 1 < n; ++j)
    sigma_prime[j + 1] = static_cast<std::int8_t>(sigma_prime[j] * s_prime[j]);
}

Spins corrected_bits(const Shot& shot, const Spins& sigma_prime) {
  return shot.sigma_readout.cwiseProduct(sigma_prime);
}

}  // namespace nishimori
