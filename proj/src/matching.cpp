#include "nishimori/matching.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

namespace nishimori {

// Vertex labels: 0 free, 1 S (outer), 2 T (inner); bit 4 marks a breadcrumb
// during scan_blossom. Endpoint p of edge k is 2k or 2k+1; endpoint_[p] is the
// vertex, p ^ 1 the opposite end.

std::int64_t BlossomMatcher::slack(int k) const {
  const auto& e = edges_[k];
  return dualvar_[e.u] + dualvar_[e.v] - 2 * e.weight;
}

void BlossomMatcher::leaves(int b, std::vector<int>& out) const {
  if (b < nv_) {
    out.push_back(b);
    return;
  }
  for (int t : blossomchilds_[b]) leaves(t, out);
}

void BlossomMatcher::assign_label(int w, int t, int p) {
  const int b = inblossom_[w];
  assert(label_[w] == 0 && label_[b] == 0);
  label_[w] = label_[b] = t;
  labelend_[w] = labelend_[b] = p;
  bestedge_[w] = bestedge_[b] = -1;
  if (t == 1) {
    leaves(b, queue_);
  } else if (t == 2) {
    const int base = blossombase_[b];
    assert(mate_[base] >= 0);
    assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
  }
}

int BlossomMatcher::scan_blossom(int v, int w) {
  std::vector<int> path;
  int base = -1;
  while (v != -1 || w != -1) {
    int b = inblossom_[v];
    if (label_[b] & 4) {
      base = blossombase_[b];
      break;
    }
    assert(label_[b] == 1);
    path.push_back(b);
    label_[b] = 5;
    if (labelend_[b] == -1) {
      v = -1;
    } else {
      v = endpoint_[labelend_[b]];
      b = inblossom_[v];
      assert(label_[b] == 2);
      v = endpoint_[labelend_[b]];
    }
    if (w != -1) std::swap(v, w);
  }
  for (int b : path) label_[b] = 1;
  return base;
}

void BlossomMatcher::add_blossom(int base, int k) {
  int v = edges_[k].u;
  int w = edges_[k].v;
  const int bb = inblossom_[base];
  int bv = inblossom_[v];
  int bw = inblossom_[w];
  const int b = unused_.back();
  unused_.pop_back();
  blossombase_[b] = base;
  blossomparent_[b] = -1;
  blossomparent_[bb] = b;
  auto& path = blossomchilds_[b];
  auto& endps = blossomendps_[b];
  path.clear();
  endps.clear();
  while (bv != bb) {
    blossomparent_[bv] = b;
    path.push_back(bv);
    endps.push_back(labelend_[bv]);
    v = endpoint_[labelend_[bv]];
    bv = inblossom_[v];
  }
  path.push_back(bb);
  std::reverse(path.begin(), path.end());
  std::reverse(endps.begin(), endps.end());
  endps.push_back(2 * k);
  while (bw != bb) {
    blossomparent_[bw] = b;
    path.push_back(bw);
    endps.push_back(labelend_[bw] ^ 1);
    w = endpoint_[labelend_[bw]];
    bw = inblossom_[w];
  }
  assert(label_[bb] == 1);
  label_[b] = 1;
  labelend_[b] = labelend_[bb];
  dualvar_[b] = 0;

  std::vector<int> lv;
  leaves(b, lv);
  for (int x : lv) {
    if (label_[inblossom_[x]] == 2) queue_.push_back(x);
    inblossom_[x] = b;
  }

  std::vector<int> bestedgeto(2 * nv_, -1);
  for (int sub : path) {
    std::vector<std::vector<int>> nblists;
    if (!has_bestedges_[sub]) {
      std::vector<int> sl;
      leaves(sub, sl);
      for (int x : sl) {
        std::vector<int> lst;
        lst.reserve(neighbend_[x].size());
        for (int p : neighbend_[x]) lst.push_back(p / 2);
        nblists.push_back(std::move(lst));
      }
    } else {
      nblists.push_back(blossombestedges_[sub]);
    }
    for (const auto& nblist : nblists) {
      for (int kk : nblist) {
        int i = edges_[kk].u;
        int j = edges_[kk].v;
        if (inblossom_[j] == b) std::swap(i, j);
        const int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
          bestedgeto[bj] = kk;
      }
    }
    blossombestedges_[sub].clear();
    has_bestedges_[sub] = 0;
    bestedge_[sub] = -1;
  }
  auto& bbe = blossombestedges_[b];
  bbe.clear();
  for (int kk : bestedgeto)
    if (kk != -1) bbe.push_back(kk);
  has_bestedges_[b] = 1;
  bestedge_[b] = -1;
  for (int kk : bbe)
    if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
}

void BlossomMatcher::expand_blossom(int b, bool endstage) {
  const std::vector<int> childs = blossomchilds_[b];
  for (int s : childs) {
    blossomparent_[s] = -1;
    if (s < nv_) {
      inblossom_[s] = s;
    } else if (endstage && dualvar_[s] == 0) {
      expand_blossom(s, endstage);
    } else {
      std::vector<int> lv;
      leaves(s, lv);
      for (int x : lv) inblossom_[x] = s;
    }
  }
  if (!endstage && label_[b] == 2) {
    const auto& ch = blossomchilds_[b];
    const auto& ep = blossomendps_[b];
    const int nch = static_cast<int>(ch.size());
    auto at = [nch](const std::vector<int>& vec, int idx) {
      return vec[static_cast<std::size_t>(((idx % nch) + nch) % nch)];
    };
    const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
    int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
    int jstep = 0;
    int endptrick = 0;
    if (j & 1) {
      j -= nch;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    int p = labelend_[b];
    while (j != 0) {
      label_[endpoint_[p ^ 1]] = 0;
      label_[endpoint_[at(ep, j - endptrick) ^ endptrick ^ 1]] = 0;
      assign_label(endpoint_[p ^ 1], 2, p);
      allowedge_[at(ep, j - endptrick) / 2] = 1;
      j += jstep;
      p = at(ep, j - endptrick) ^ endptrick;
      allowedge_[p / 2] = 1;
      j += jstep;
    }
    int bv = at(ch, j);
    label_[endpoint_[p ^ 1]] = label_[bv] = 2;
    labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
    bestedge_[bv] = -1;
    j += jstep;
    while (at(ch, j) != entrychild) {
      bv = at(ch, j);
      if (label_[bv] == 1) {
        j += jstep;
        continue;
      }
      std::vector<int> lv;
      leaves(bv, lv);
      int found = -1;
      for (int x : lv) {
        if (label_[x] != 0) {
          found = x;
          break;
        }
      }
      if (found >= 0) {
        assert(label_[found] == 2);
        assert(inblossom_[found] == bv);
        label_[found] = 0;
        label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
        assign_label(found, 2, labelend_[found]);
      }
      j += jstep;
    }
  }
  label_[b] = labelend_[b] = -1;
  blossomchilds_[b].clear();
  blossomendps_[b].clear();
  blossombase_[b] = -1;
  blossombestedges_[b].clear();
  has_bestedges_[b] = 0;
  bestedge_[b] = -1;
  unused_.push_back(b);
}

void BlossomMatcher::augment_blossom(int b, int v) {
  int t = v;
  while (blossomparent_[t] != b) t = blossomparent_[t];
  if (t >= nv_) augment_blossom(t, v);
  auto& ch = blossomchilds_[b];
  auto& ep = blossomendps_[b];
  const int nch = static_cast<int>(ch.size());
  auto idx = [nch](int i) { return static_cast<std::size_t>(((i % nch) + nch) % nch); };
  const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
  int j = i;
  int jstep = 0;
  int endptrick = 0;
  if (i & 1) {
    j -= nch;
    jstep = 1;
    endptrick = 0;
  } else {
    jstep = -1;
    endptrick = 1;
  }
  while (j != 0) {
    j += jstep;
    t = ch[idx(j)];
    const int p = ep[idx(j - endptrick)] ^ endptrick;
    if (t >= nv_) augment_blossom(t, endpoint_[p]);
    j += jstep;
    t = ch[idx(j)];
    if (t >= nv_) augment_blossom(t, endpoint_[p ^ 1]);
    mate_[endpoint_[p]] = p ^ 1;
    mate_[endpoint_[p ^ 1]] = p;
  }
  std::rotate(ch.begin(), ch.begin() + i, ch.end());
  std::rotate(ep.begin(), ep.begin() + i, ep.end());
  blossombase_[b] = blossombase_[ch[0]];
  assert(blossombase_[b] == v);
}

void BlossomMatcher::augment_matching(int k) {
  const int ends[2][2] = {{edges_[k].u, 2 * k + 1}, {edges_[k].v, 2 * k}};
  for (const auto& sp : ends) {
    int s = sp[0];
    int p = sp[1];
    while (true) {
      const int bs = inblossom_[s];
      assert(label_[bs] == 1);
      if (bs >= nv_) augment_blossom(bs, s);
      mate_[s] = p;
      if (labelend_[bs] == -1) break;
      const int t = endpoint_[labelend_[bs]];
      const int bt = inblossom_[t];
      assert(label_[bt] == 2);
      s = endpoint_[labelend_[bt]];
      const int j = endpoint_[labelend_[bt] ^ 1];
      assert(blossombase_[bt] == t);
      if (bt >= nv_) augment_blossom(bt, j);
      mate_[j] = labelend_[bt];
      p = labelend_[bt] ^ 1;
    }
  }
}

std::vector<int> BlossomMatcher::solve(int num_vertices, std::span<const WeightedEdge> edges,
                                       bool max_cardinality) {
  nv_ = num_vertices;
  if (edges.empty() || nv_ == 0) return std::vector<int>(static_cast<std::size_t>(nv_), -1);
  const int nedge = static_cast<int>(edges.size());
  edges_.assign(edges.begin(), edges.end());
  std::int64_t maxweight = 0;
  for (auto& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= nv_ || e.v >= nv_ || e.u == e.v)
      throw std::invalid_argument("BlossomMatcher: bad edge");
    e.weight *= 2;  // keeps every dual update integral
    maxweight = std::max(maxweight, e.weight);
  }
  const std::size_t n2 = 2 * static_cast<std::size_t>(nv_);
  endpoint_.resize(2 * static_cast<std::size_t>(nedge));
  neighbend_.assign(static_cast<std::size_t>(nv_), {});
  for (int k = 0; k < nedge; ++k) {
    endpoint_[2 * k] = edges_[k].u;
    endpoint_[2 * k + 1] = edges_[k].v;
    neighbend_[edges_[k].u].push_back(2 * k + 1);
    neighbend_[edges_[k].v].push_back(2 * k);
  }
  mate_.assign(static_cast<std::size_t>(nv_), -1);
  label_.assign(n2, 0);
  labelend_.assign(n2, -1);
  inblossom_.resize(static_cast<std::size_t>(nv_));
  std::iota(inblossom_.begin(), inblossom_.end(), 0);
  blossomparent_.assign(n2, -1);
  blossomchilds_.assign(n2, {});
  blossomendps_.assign(n2, {});
  blossombase_.assign(n2, -1);
  for (int v = 0; v < nv_; ++v) blossombase_[v] = v;
  bestedge_.assign(n2, -1);
  blossombestedges_.assign(n2, {});
  has_bestedges_.assign(n2, 0);
  unused_.clear();
  for (int b = nv_; b < 2 * nv_; ++b) unused_.push_back(b);
  dualvar_.assign(n2, 0);
  for (int v = 0; v < nv_; ++v) dualvar_[v] = maxweight;
  allowedge_.assign(static_cast<std::size_t>(nedge), 0);
  queue_.clear();

  for (int stage = 0; stage < nv_; ++stage) {
    std::fill(label_.begin(), label_.end(), 0);
    std::fill(bestedge_.begin(), bestedge_.end(), -1);
    for (int b = nv_; b < 2 * nv_; ++b) {
      blossombestedges_[b].clear();
      has_bestedges_[b] = 0;
    }
    std::fill(allowedge_.begin(), allowedge_.end(), 0);
    queue_.clear();
    for (int v = 0; v < nv_; ++v)
      if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

    bool augmented = false;
    while (true) {
      while (!queue_.empty() && !augmented) {
        const int v = queue_.back();
        queue_.pop_back();
        assert(label_[inblossom_[v]] == 1);
        for (int p : neighbend_[v]) {
          const int k = p / 2;
          const int w = endpoint_[p];
          if (inblossom_[v] == inblossom_[w]) continue;
          std::int64_t kslack = 0;
          if (!allowedge_[k]) {
            kslack = slack(k);
            if (kslack <= 0) allowedge_[k] = 1;
          }
          if (allowedge_[k]) {
            if (label_[inblossom_[w]] == 0) {
              assign_label(w, 2, p ^ 1);
            } else if (label_[inblossom_[w]] == 1) {
              const int base = scan_blossom(v, w);
              if (base >= 0) {
                add_blossom(base, k);
              } else {
                augment_matching(k);
                augmented = true;
                break;
              }
            } else if (label_[w] == 0) {
              assert(label_[inblossom_[w]] == 2);
              label_[w] = 2;
              labelend_[w] = p ^ 1;
            }
          } else if (label_[inblossom_[w]] == 1) {
            const int b = inblossom_[v];
            if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
          } else if (label_[w] == 0) {
            if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
          }
        }
      }
      if (augmented) break;

      int deltatype = -1;
      std::int64_t delta = 0;
      int deltaedge = -1;
      int deltablossom = -1;
      if (!max_cardinality) {
        deltatype = 1;
        delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_);
      }
      for (int v = 0; v < nv_; ++v) {
        if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
          const std::int64_t d = slack(bestedge_[v]);
          if (deltatype == -1 || d < delta) {
            delta = d;
            deltatype = 2;
            deltaedge = bestedge_[v];
          }
        }
      }
      for (int b = 0; b < 2 * nv_; ++b) {
        if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
          const std::int64_t ks = slack(bestedge_[b]);
          assert(ks % 2 == 0);
          const std::int64_t d = ks / 2;
          if (deltatype == -1 || d < delta) {
            delta = d;
            deltatype = 3;
            deltaedge = bestedge_[b];
          }
        }
      }
      for (int b = nv_; b < 2 * nv_; ++b) {
        if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
            (deltatype == -1 || dualvar_[b] < delta)) {
          delta = dualvar_[b];
          deltatype = 4;
          deltablossom = b;
        }
      }
      if (deltatype == -1) {
        deltatype = 1;
        delta = std::max<std::int64_t>(
            0, *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_));
      }

      for (int v = 0; v < nv_; ++v) {
        const int lb = label_[inblossom_[v]];
        if (lb == 1)
          dualvar_[v] -= delta;
        else if (lb == 2)
          dualvar_[v] += delta;
      }
      for (int b = nv_; b < 2 * nv_; ++b) {
        if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
          if (label_[b] == 1)
            dualvar_[b] += delta;
          else if (label_[b] == 2)
            dualvar_[b] -= delta;
        }
      }

      if (deltatype == 1) {
        break;
      } else if (deltatype == 2) {
        allowedge_[deltaedge] = 1;
        int i = edges_[deltaedge].u;
        int j = edges_[deltaedge].v;
        if (label_[inblossom_[i]] == 0) std::swap(i, j);
        assert(label_[inblossom_[i]] == 1);
        queue_.push_back(i);
      } else if (deltatype == 3) {
        allowedge_[deltaedge] = 1;
        const int i = edges_[deltaedge].u;
        assert(label_[inblossom_[i]] == 1);
        queue_.push_back(i);
      } else {
        expand_blossom(deltablossom, false);
      }
    }
    if (!augmented) break;

    for (int b = nv_; b < 2 * nv_; ++b)
      if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0)
        expand_blossom(b, true);
  }

  std::vector<int> result(static_cast<std::size_t>(nv_), -1);
  for (int v = 0; v < nv_; ++v)
    if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
  return result;
}

DefectMatching match_with_boundary(const Eigen::MatrixXi& pair_cost,
                                   const Eigen::VectorXi& boundary_cost,
                                   BlossomMatcher& matcher) {
  const int k = static_cast<int>(boundary_cost.size());
  DefectMatching out;
  if (k == 0) return out;
  if (k == 1) {
    out.pairs.push_back({0, -1});
    out.weight = boundary_cost[0];
    return out;
  }
  int max_cost = boundary_cost.maxCoeff();
  if (k > 1) max_cost = std::max(max_cost, pair_cost.maxCoeff());
  // Perfect matchings all have k edges, so maximising (offset - cost) minimises cost.
  const std::int64_t offset = static_cast<std::int64_t>(max_cost) + 1;
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(k * (k - 1) + k));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) edges.push_back({i, j, offset - pair_cost(i, j)});
  for (int i = 0; i < k; ++i) edges.push_back({i, k + i, offset - boundary_cost[i]});
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) edges.push_back({k + i, k + j, offset});
  const auto mate = matcher.solve(2 * k, edges, true);
  for (int i = 0; i < k; ++i) {
    const int m = mate[i];
    if (m < 0) throw std::logic_error("match_with_boundary: defect left unmatched");
    if (m >= k) {
      out.pairs.push_back({i, -1});
      out.weight += boundary_cost[i];
    } else if (m > i) {
      out.pairs.push_back({i, m});
      out.weight += pair_cost(i, m);
    }
  }
  return out;
}

}  // namespace nishimori
