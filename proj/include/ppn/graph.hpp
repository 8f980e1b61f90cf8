#ifndef PPN_GRAPH_HPP
#define PPN_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ppn/claims.hpp"

namespace ppn {

using NodeIndex = std::int32_t;

struct NodeAttr {
  std::string specialty;
  std::optional<double> latitude;
  std::optional<double> longitude;
  bool has_geo() const { return latitude.has_value() && longitude.has_value(); }
};

// Patient-prescriber incidence within one schedule. Multiple claims by the
// same (patient, prescriber) pair collapse to one edge. Node ids are kept
// sorted so indices are stable for a given input set.
struct BipartiteGraph {
  std::vector<std::string> patient_ids;
  std::vector<std::string> prescriber_ids;
  std::vector<std::vector<NodeIndex>> patient_adj;     // patient -> prescribers
  std::vector<std::vector<NodeIndex>> prescriber_adj;  // prescriber -> patients
  std::size_t num_edges = 0;
};

struct WeightedEdge {
  NodeIndex u = 0;  // u < v
  NodeIndex v = 0;
  std::int64_t weight = 1;
  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// Unlabeled simple undirected graph used by the clustering and randomization
// kernels. Edges are normalized (u < v) and sorted; for graphs derived from a
// WeightedGraph that makes edge index order the lexicographic order of the
// endpoint id pairs.
struct SimpleGraph {
  NodeIndex num_nodes = 0;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  std::vector<std::vector<NodeIndex>> adj;  // sorted neighbor lists

  static SimpleGraph from_edge_list(
      NodeIndex n, std::vector<std::pair<NodeIndex, NodeIndex>> raw_edges) {
    SimpleGraph g;
    g.num_nodes = n;
    for (auto& [a, b] : raw_edges) {
      if (a == b) throw std::invalid_argument("self-loop in edge list");
      if (a > b) std::swap(a, b);
      if (a < 0 || b >= n) throw std::invalid_argument("edge endpoint out of range");
    }
    std::sort(raw_edges.begin(), raw_edges.end());
    if (std::adjacent_find(raw_edges.begin(), raw_edges.end()) != raw_edges.end())
      throw std::invalid_argument("parallel edge in edge list");
    g.edges = std::move(raw_edges);
    g.adj.assign(static_cast<std::size_t>(n), {});
    for (auto [a, b] : g.edges) {
      g.adj[static_cast<std::size_t>(a)].push_back(b);
      g.adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
  }

  NodeIndex degree(NodeIndex v) const {
    return static_cast<NodeIndex>(adj[static_cast<std::size_t>(v)].size());
  }
  bool has_edge(NodeIndex a, NodeIndex b) const {
    const auto& nbrs = adj[static_cast<std::size_t>(a)];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
  }
};

// Weighted undirected simple graph over string-identified nodes. Node ids are
// sorted, so node index order is lexicographic id order; the edge list is
// sorted by endpoint indices. Instances are immutable after construction.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  // `edges` endpoints refer to positions in `ids`; ids must be sorted+unique.
  WeightedGraph(std::vector<std::string> ids, std::vector<NodeAttr> attrs,
                std::vector<WeightedEdge> edges)
      : ids_(std::move(ids)), attrs_(std::move(attrs)), edges_(std::move(edges)) {
    if (attrs_.empty()) attrs_.resize(ids_.size());
    if (attrs_.size() != ids_.size())
      throw std::invalid_argument("attrs/ids size mismatch");
    if (!std::is_sorted(ids_.begin(), ids_.end()) ||
        std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
      throw std::invalid_argument("node ids must be sorted and unique");
    for (auto& e : edges_) {
      if (e.u == e.v) throw std::invalid_argument("self-loop");
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u < 0 || static_cast<std::size_t>(e.v) >= ids_.size())
        throw std::invalid_argument("edge endpoint out of range");
      if (e.weight < 1) throw std::invalid_argument("edge weight must be >= 1");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) {
                return std::pair(a.u, a.v) < std::pair(b.u, b.v);
              });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
        throw std::invalid_argument("parallel edge");
    }
    adj_.assign(ids_.size(), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adj_[static_cast<std::size_t>(edges_[e].u)].push_back(
          {edges_[e].v, static_cast<NodeIndex>(e)});
      adj_[static_cast<std::size_t>(edges_[e].v)].push_back(
          {edges_[e].u, static_cast<NodeIndex>(e)});
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
  }

  std::size_t num_nodes() const { return ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<NodeAttr>& attrs() const { return attrs_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  // (neighbor index, edge index) pairs, sorted by neighbor.
  const std::vector<std::vector<std::pair<NodeIndex, NodeIndex>>>& adjacency() const {
    return adj_;
  }

  const std::string& id(NodeIndex v) const { return ids_[static_cast<std::size_t>(v)]; }
  NodeIndex degree(NodeIndex v) const {
    return static_cast<NodeIndex>(adj_[static_cast<std::size_t>(v)].size());
  }
  std::optional<NodeIndex> index_of(const std::string& id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<NodeIndex>(it - ids_.begin());
  }

  SimpleGraph simple_view() const {
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    e.reserve(edges_.size());
    for (const auto& we : edges_) e.emplace_back(we.u, we.v);
    return SimpleGraph::from_edge_list(static_cast<NodeIndex>(ids_.size()),
                                       std::move(e));
  }

 private:
  std::vector<std::string> ids_;
  std::vector<NodeAttr> attrs_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<std::pair<NodeIndex, NodeIndex>>> adj_;
};

inline BipartiteGraph build_bipartite(const std::vector<ClaimRecord>& records) {
  BipartiteGraph g;
  for (const auto& r : records) {
    g.patient_ids.push_back(r.patient_id);
    g.prescriber_ids.push_back(r.prescriber_id);
  }
  auto dedupe = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(g.patient_ids);
  dedupe(g.prescriber_ids);
  auto index_in = [](const std::vector<std::string>& v, const std::string& id) {
    return static_cast<NodeIndex>(
        std::lower_bound(v.begin(), v.end(), id) - v.begin());
  };
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    pairs.emplace_back(index_in(g.patient_ids, r.patient_id),
                       index_in(g.prescriber_ids, r.prescriber_id));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  g.patient_adj.assign(g.patient_ids.size(), {});
  g.prescriber_adj.assign(g.prescriber_ids.size(), {});
  for (auto [p, q] : pairs) {
    g.patient_adj[static_cast<std::size_t>(p)].push_back(q);
    g.prescriber_adj[static_cast<std::size_t>(q)].push_back(p);
  }
  g.num_edges = pairs.size();
  return g;
}

enum class Side { prescriber, patient };

// Unipartite projection. Nodes are all nodes of the chosen side, including
// those that end up with no edges (the singletons); edge weight is the number
// of distinct counterpart entities shared by the endpoint pair.
inline WeightedGraph project(const BipartiteGraph& b, Side side) {
  const auto& ids = (side == Side::prescriber) ? b.prescriber_ids : b.patient_ids;
  const auto& counterpart_adj =
      (side == Side::prescriber) ? b.patient_adj : b.prescriber_adj;
  const std::size_t n = ids.size();
  std::unordered_map<std::uint64_t, std::int64_t> weight;
  for (const auto& owned : counterpart_adj) {
    for (std::size_t i = 0; i < owned.size(); ++i) {
      for (std::size_t j = i + 1; j < owned.size(); ++j) {
        NodeIndex a = owned[i], c = owned[j];
        if (a > c) std::swap(a, c);
        std::uint64_t key = static_cast<std::uint64_t>(a) * n +
                            static_cast<std::uint64_t>(c);
        ++weight[key];
      }
    }
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(weight.size());
  for (auto [key, w] : weight) {
    edges.push_back({static_cast<NodeIndex>(key / n),
                     static_cast<NodeIndex>(key % n), w});
  }
  return WeightedGraph(ids, {}, std::move(edges));
}

inline std::vector<NodeIndex> degree_sequence(const WeightedGraph& g) {
  std::vector<NodeIndex> degrees(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    degrees[v] = g.degree(static_cast<NodeIndex>(v));
  return degrees;
}

inline std::vector<NodeIndex> degree_sequence(const SimpleGraph& g) {
  std::vector<NodeIndex> degrees(static_cast<std::size_t>(g.num_nodes));
  for (NodeIndex v = 0; v < g.num_nodes; ++v)
    degrees[static_cast<std::size_t>(v)] = g.degree(v);
  return degrees;
}

namespace detail {

template <typename AdjFn>
std::vector<std::vector<NodeIndex>> components_impl(std::size_t n, AdjFn&& neighbors) {
  std::vector<std::vector<NodeIndex>> components;
  std::vector<char> seen(n, 0);
  std::vector<NodeIndex> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<NodeIndex> comp;
    seen[s] = 1;
    stack.push_back(static_cast<NodeIndex>(s));
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (NodeIndex w : neighbors(v)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  // Largest first; ties by smallest contained node index (= smallest id for
  // graphs with sorted ids), so the front component is the canonical LCC.
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  return components;
}

}  // namespace detail

inline std::vector<std::vector<NodeIndex>> connected_components(const WeightedGraph& g) {
  std::vector<NodeIndex> scratch;
  return detail::components_impl(g.num_nodes(), [&](NodeIndex v) {
    scratch.clear();
    for (auto [w, e] : g.adjacency()[static_cast<std::size_t>(v)]) scratch.push_back(w);
    return scratch;
  });
}

inline std::vector<std::vector<NodeIndex>> connected_components(const SimpleGraph& g) {
  return detail::components_impl(
      static_cast<std::size_t>(g.num_nodes),
      [&](NodeIndex v) -> const std::vector<NodeIndex>& {
        return g.adj[static_cast<std::size_t>(v)];
      });
}

inline bool is_connected(const SimpleGraph& g) {
  if (g.num_nodes == 0) return true;
  return connected_components(g).size() == 1;
}

// Induced subgraph on the given nodes (indices into g), keeping ids, attrs
// and weights of everything retained.
inline WeightedGraph induced_subgraph(const WeightedGraph& g,
                                      const std::vector<NodeIndex>& nodes) {
  std::vector<NodeIndex> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  std::vector<NodeIndex> remap(g.num_nodes(), -1);
  std::vector<std::string> ids;
  std::vector<NodeAttr> attrs;
  ids.reserve(sorted.size());
  attrs.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    remap[static_cast<std::size_t>(sorted[i])] = static_cast<NodeIndex>(i);
    ids.push_back(g.id(sorted[i]));
    attrs.push_back(g.attrs()[static_cast<std::size_t>(sorted[i])]);
  }
  std::vector<WeightedEdge> edges;
  for (const auto& e : g.edges()) {
    NodeIndex u = remap[static_cast<std::size_t>(e.u)];
    NodeIndex v = remap[static_cast<std::size_t>(e.v)];
    if (u >= 0 && v >= 0) edges.push_back({u, v, e.weight});
  }
  return WeightedGraph(std::move(ids), std::move(attrs), std::move(edges));
}

inline WeightedGraph largest_connected_component(const WeightedGraph& g) {
  if (g.num_nodes() == 0)
    throw std::invalid_argument("largest_connected_component: empty graph");
  auto components = connected_components(g);
  return induced_subgraph(g, components.front());
}

inline WeightedGraph drop_singletons(const WeightedGraph& g) {
  std::vector<NodeIndex> keep;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(static_cast<NodeIndex>(v)) > 0)
      keep.push_back(static_cast<NodeIndex>(v));
  }
  return induced_subgraph(g, keep);
}

// Prescriber metadata harvested from claims: first non-empty specialty and
// first in-range coordinate pair seen, in record order.
inline std::map<std::string, NodeAttr> collect_prescriber_attrs(
    const std::vector<ClaimRecord>& records) {
  std::map<std::string, NodeAttr> attrs;
  for (const auto& r : records) {
    NodeAttr& a = attrs[r.prescriber_id];
    if (a.specialty.empty() && !r.specialty.empty()) a.specialty = r.specialty;
    if (!a.has_geo() && r.latitude && r.longitude) {
      a.latitude = r.latitude;
      a.longitude = r.longitude;
    }
  }
  return attrs;
}

// Rebuilds the graph with attributes looked up by node id.
inline WeightedGraph with_attrs(const WeightedGraph& g,
                                const std::map<std::string, NodeAttr>& attr_by_id) {
  std::vector<NodeAttr> attrs(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    auto it = attr_by_id.find(g.ids()[v]);
    if (it != attr_by_id.end()) attrs[v] = it->second;
  }
  return WeightedGraph(g.ids(), std::move(attrs),
                       std::vector<WeightedEdge>(g.edges()));
}

}  // namespace ppn

#endif  // PPN_GRAPH_HPP
