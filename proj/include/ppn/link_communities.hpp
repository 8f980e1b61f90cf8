#ifndef PPN_LINK_COMMUNITIES_HPP
#define PPN_LINK_COMMUNITIES_HPP

#include <algorithm>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ppn/graph.hpp"

namespace ppn {

namespace detail {

// |adj(i) ∩ adj(j)| for sorted neighbor lists.
inline std::size_t common_neighbors(const std::vector<NodeIndex>& a,
                                    const std::vector<NodeIndex>& b) {
  std::size_t count = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (a[i] > b[j]) ++j;
    else { ++count; ++i; ++j; }
  }
  return count;
}

// Jaccard similarity of the inclusive neighborhoods {i} ∪ adj(i) and
// {j} ∪ adj(j) of the two impost nodes. Edge weights are ignored.
inline double impost_similarity(const SimpleGraph& g, NodeIndex i, NodeIndex j) {
  const auto& ai = g.adj[static_cast<std::size_t>(i)];
  const auto& aj = g.adj[static_cast<std::size_t>(j)];
  std::size_t common = common_neighbors(ai, aj);
  // i itself lies in adj(j) (and vice versa) exactly when (i,j) is an edge.
  std::size_t inter = common + (g.has_edge(i, j) ? 2 : 0);
  std::size_t uni = ai.size() + 1 + aj.size() + 1 - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace detail

// Similarity of two distinct edges sharing exactly one endpoint (the
// keystone); computed from the non-shared (impost) endpoints.
inline double edge_similarity(const SimpleGraph& g,
                              std::pair<NodeIndex, NodeIndex> e1,
                              std::pair<NodeIndex, NodeIndex> e2) {
  if (e1.first > e1.second) std::swap(e1.first, e1.second);
  if (e2.first > e2.second) std::swap(e2.first, e2.second);
  if (e1 == e2) throw std::invalid_argument("edge_similarity: identical edges");
  NodeIndex impost1, impost2;
  if (e1.first == e2.first) { impost1 = e1.second; impost2 = e2.second; }
  else if (e1.first == e2.second) { impost1 = e1.second; impost2 = e2.first; }
  else if (e1.second == e2.first) { impost1 = e1.first; impost2 = e2.second; }
  else if (e1.second == e2.second) { impost1 = e1.first; impost2 = e2.first; }
  else throw std::invalid_argument("edge_similarity: edges are not adjacent");
  return detail::impost_similarity(g, impost1, impost2);
}

// All unordered pairs of distinct edges sharing an endpoint, each exactly
// once. Pairs are emitted at their shared node, which is unique in a simple
// graph.
inline std::vector<std::pair<NodeIndex, NodeIndex>> adjacent_edge_pairs(
    const SimpleGraph& g) {
  std::vector<std::vector<NodeIndex>> incident(static_cast<std::size_t>(g.num_nodes));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    incident[static_cast<std::size_t>(g.edges[e].first)].push_back(
        static_cast<NodeIndex>(e));
    incident[static_cast<std::size_t>(g.edges[e].second)].push_back(
        static_cast<NodeIndex>(e));
  }
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  for (const auto& inc : incident) {
    for (std::size_t i = 0; i < inc.size(); ++i)
      for (std::size_t j = i + 1; j < inc.size(); ++j)
        pairs.emplace_back(inc[i], inc[j]);
  }
  return pairs;
}

struct DendrogramMerge {
  NodeIndex left = 0;   // cluster ids: leaves 0..M-1, merge t creates M+t
  NodeIndex right = 0;
  double similarity = 0.0;
};

struct Dendrogram {
  std::size_t num_leaves = 0;
  std::vector<DendrogramMerge> merges;  // similarity is non-increasing
};

// Agglomerative average-linkage clustering of the edge set. The linkage
// similarity of two clusters is the mean over all |A|*|B| cross pairs, with
// non-adjacent pairs contributing 0; only adjacent pairs are materialized.
// Ties are broken toward the pair whose smallest member edge index is least
// (edge indices follow the canonical sorted edge order), then by the other
// cluster's smallest member edge index.
inline Dendrogram cluster_links(const SimpleGraph& g) {
  const std::size_t m = g.edges.size();
  if (m == 0) throw std::invalid_argument("cluster_links: graph has no edges");
  if (!is_connected(g))
    throw std::invalid_argument("cluster_links: graph must be connected");

  Dendrogram dendro;
  dendro.num_leaves = m;
  if (m == 1) return dendro;

  const std::size_t max_clusters = 2 * m - 1;
  // Cross-pair similarity sums between live clusters, stored symmetrically.
  std::vector<std::unordered_map<NodeIndex, double>> cross(max_clusters);
  std::vector<std::size_t> size(max_clusters, 1);
  std::vector<NodeIndex> min_edge(max_clusters);
  std::vector<char> active(max_clusters, 0);
  for (std::size_t c = 0; c < m; ++c) {
    min_edge[c] = static_cast<NodeIndex>(c);
    active[c] = 1;
  }

  struct Entry {
    double sim;
    NodeIndex key1, key2;  // sorted min-edge ids of the two clusters
    NodeIndex a, b;
  };
  struct Worse {
    bool operator()(const Entry& x, const Entry& y) const {
      if (x.sim != y.sim) return x.sim < y.sim;
      if (x.key1 != y.key1) return x.key1 > y.key1;
      return x.key2 > y.key2;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Worse> heap;

  auto push_pair = [&](NodeIndex a, NodeIndex b, double mean) {
    NodeIndex ka = min_edge[static_cast<std::size_t>(a)];
    NodeIndex kb = min_edge[static_cast<std::size_t>(b)];
    if (ka > kb) std::swap(ka, kb);
    heap.push({mean, ka, kb, a, b});
  };

  {  // leaf-level similarities, one per adjacent edge pair
    std::vector<std::vector<NodeIndex>> incident(
        static_cast<std::size_t>(g.num_nodes));
    for (std::size_t e = 0; e < m; ++e) {
      incident[static_cast<std::size_t>(g.edges[e].first)].push_back(
          static_cast<NodeIndex>(e));
      incident[static_cast<std::size_t>(g.edges[e].second)].push_back(
          static_cast<NodeIndex>(e));
    }
    for (NodeIndex k = 0; k < g.num_nodes; ++k) {
      const auto& inc = incident[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < inc.size(); ++i) {
        for (std::size_t j = i + 1; j < inc.size(); ++j) {
          NodeIndex e = inc[i], f = inc[j];
          auto [eu, ev] = g.edges[static_cast<std::size_t>(e)];
          auto [fu, fv] = g.edges[static_cast<std::size_t>(f)];
          NodeIndex impost_e = (eu == k) ? ev : eu;
          NodeIndex impost_f = (fu == k) ? fv : fu;
          double s = detail::impost_similarity(g, impost_e, impost_f);
          cross[static_cast<std::size_t>(e)][f] = s;
          cross[static_cast<std::size_t>(f)][e] = s;
          push_pair(e, f, s);
        }
      }
    }
  }

  while (dendro.merges.size() < m - 1) {
    if (heap.empty())
      throw std::logic_error("cluster_links: similarity support exhausted");
    Entry top = heap.top();
    heap.pop();
    const auto a = static_cast<std::size_t>(top.a);
    const auto b = static_cast<std::size_t>(top.b);
    // A pair's sum never changes while both clusters live, so liveness is the
    // only staleness check needed.
    if (!active[a] || !active[b]) continue;

    const std::size_t nid = m + dendro.merges.size();
    dendro.merges.push_back({top.a, top.b, top.sim});
    active[a] = active[b] = 0;
    active[nid] = 1;
    size[nid] = size[a] + size[b];
    min_edge[nid] = std::min(min_edge[a], min_edge[b]);

    auto& big = (cross[a].size() >= cross[b].size()) ? cross[a] : cross[b];
    auto& small = (cross[a].size() >= cross[b].size()) ? cross[b] : cross[a];
    cross[nid] = std::move(big);
    cross[nid].erase(top.a);
    cross[nid].erase(top.b);
    for (auto [c, sum] : small) {
      if (c == top.a || c == top.b) continue;
      cross[nid][c] += sum;
    }
    small.clear();
    for (auto [c, sum] : cross[nid]) {
      auto& cm = cross[static_cast<std::size_t>(c)];
      cm.erase(top.a);
      cm.erase(top.b);
      cm[static_cast<NodeIndex>(nid)] = sum;
      double mean = sum / (static_cast<double>(size[nid]) *
                           static_cast<double>(size[static_cast<std::size_t>(c)]));
      push_pair(static_cast<NodeIndex>(nid), c, mean);
    }
  }
  return dendro;
}

struct LinkPartition {
  // Community of each edge, ids 0..num_communities-1 assigned in order of
  // first appearance along the canonical edge order.
  std::vector<NodeIndex> community_of_edge;
  NodeIndex num_communities = 0;
};

namespace detail {

struct Dsu {
  std::vector<NodeIndex> parent;
  explicit Dsu(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<NodeIndex>(i);
  }
  NodeIndex find(NodeIndex x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(NodeIndex a, NodeIndex b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace detail

// Partition after applying the first `level` merges (0 = every edge its own
// community, num_leaves-1 = single community).
inline LinkPartition partition_at_level(const Dendrogram& dendro, std::size_t level) {
  const std::size_t m = dendro.num_leaves;
  if (level > dendro.merges.size())
    throw std::invalid_argument("partition_at_level: level out of range");
  detail::Dsu dsu(m);
  std::vector<NodeIndex> rep(m + dendro.merges.size());
  for (std::size_t i = 0; i < m; ++i) rep[i] = static_cast<NodeIndex>(i);
  for (std::size_t t = 0; t < level; ++t) {
    NodeIndex ra = rep[static_cast<std::size_t>(dendro.merges[t].left)];
    NodeIndex rb = rep[static_cast<std::size_t>(dendro.merges[t].right)];
    dsu.unite(ra, rb);
    rep[m + t] = dsu.find(ra);
  }
  LinkPartition p;
  p.community_of_edge.assign(m, -1);
  std::unordered_map<NodeIndex, NodeIndex> label;
  for (std::size_t e = 0; e < m; ++e) {
    NodeIndex root = dsu.find(static_cast<NodeIndex>(e));
    auto [it, inserted] = label.emplace(root, p.num_communities);
    if (inserted) ++p.num_communities;
    p.community_of_edge[e] = it->second;
  }
  return p;
}

// D = (2/M) Σ_c m_c (m_c - (n_c - 1)) / ((n_c - 2)(n_c - 1)); two-node
// communities contribute zero. Community edge sets are expected to induce
// connected subgraphs (true of dendrogram cuts), which keeps D in [0, 1].
inline double partition_density(const SimpleGraph& g, const LinkPartition& p) {
  const std::size_t m = g.edges.size();
  if (m == 0 || p.num_communities == 0)
    throw std::invalid_argument("partition_density: empty partition");
  if (p.community_of_edge.size() != m)
    throw std::invalid_argument("partition_density: partition does not cover the edge set");
  std::vector<std::size_t> edge_count(static_cast<std::size_t>(p.num_communities), 0);
  std::vector<std::unordered_set<NodeIndex>> nodes(
      static_cast<std::size_t>(p.num_communities));
  for (std::size_t e = 0; e < m; ++e) {
    NodeIndex c = p.community_of_edge[e];
    if (c < 0 || c >= p.num_communities)
      throw std::invalid_argument("partition_density: bad community id");
    ++edge_count[static_cast<std::size_t>(c)];
    nodes[static_cast<std::size_t>(c)].insert(g.edges[e].first);
    nodes[static_cast<std::size_t>(c)].insert(g.edges[e].second);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < edge_count.size(); ++c) {
    double mc = static_cast<double>(edge_count[c]);
    double nc = static_cast<double>(nodes[c].size());
    if (nc <= 2.0) continue;
    sum += mc * (mc - (nc - 1.0)) / ((nc - 2.0) * (nc - 1.0));
  }
  return 2.0 * sum / static_cast<double>(m);
}

struct BestPartition {
  // Similarity of the last merge applied at the chosen cut; 1.0 when the cut
  // keeps every edge separate.
  double cut_similarity = 1.0;
  LinkPartition partition;
  double density = 0.0;
};

// Evaluates D after every merge prefix of the dendrogram (both extremes
// included) and returns the maximizing cut; ties go to the coarser partition.
inline BestPartition best_partition(const SimpleGraph& g, const Dendrogram& dendro) {
  const std::size_t m = dendro.num_leaves;
  if (m != g.edges.size())
    throw std::invalid_argument("best_partition: dendrogram does not match graph");
  if (m == 0) throw std::invalid_argument("best_partition: no edges");

  struct Cluster {
    std::size_t edges = 0;
    double term = 0.0;
    std::unordered_set<NodeIndex> nodes;
  };
  std::vector<Cluster> clusters(m + dendro.merges.size());
  for (std::size_t e = 0; e < m; ++e) {
    clusters[e].edges = 1;
    clusters[e].nodes = {g.edges[e].first, g.edges[e].second};
  }
  auto density_term = [](std::size_t edges, std::size_t nodes) {
    if (nodes <= 2) return 0.0;
    double mc = static_cast<double>(edges);
    double nc = static_cast<double>(nodes);
    return mc * (mc - (nc - 1.0)) / ((nc - 2.0) * (nc - 1.0));
  };

  double term_sum = 0.0;
  double best_density = 0.0;  // level 0: all singleton-edge communities
  std::size_t best_level = 0;
  for (std::size_t t = 0; t < dendro.merges.size(); ++t) {
    auto& ca = clusters[static_cast<std::size_t>(dendro.merges[t].left)];
    auto& cb = clusters[static_cast<std::size_t>(dendro.merges[t].right)];
    Cluster merged;
    merged.edges = ca.edges + cb.edges;
    if (ca.nodes.size() < cb.nodes.size()) std::swap(ca.nodes, cb.nodes);
    merged.nodes = std::move(ca.nodes);
    merged.nodes.insert(cb.nodes.begin(), cb.nodes.end());
    cb.nodes.clear();
    merged.term = density_term(merged.edges, merged.nodes.size());
    term_sum += merged.term - ca.term - cb.term;
    clusters[m + t] = std::move(merged);
    double density = 2.0 * term_sum / static_cast<double>(m);
    if (density >= best_density) {
      best_density = density;
      best_level = t + 1;
    }
  }

  BestPartition best;
  best.density = best_density;
  best.partition = partition_at_level(dendro, best_level);
  best.cut_similarity =
      best_level == 0 ? 1.0 : dendro.merges[best_level - 1].similarity;
  return best;
}

// Node -> sorted community ids over its incident edges. A node sitting on
// edges from several communities belongs to all of them.
inline std::vector<std::vector<NodeIndex>> node_communities(const SimpleGraph& g,
                                                            const LinkPartition& p) {
  std::vector<std::vector<NodeIndex>> memberships(
      static_cast<std::size_t>(g.num_nodes));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    NodeIndex c = p.community_of_edge[e];
    memberships[static_cast<std::size_t>(g.edges[e].first)].push_back(c);
    memberships[static_cast<std::size_t>(g.edges[e].second)].push_back(c);
  }
  for (auto& cs : memberships) {
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  }
  return memberships;
}

}  // namespace ppn

#endif  // PPN_LINK_COMMUNITIES_HPP
