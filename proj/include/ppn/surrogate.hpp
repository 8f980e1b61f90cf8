#ifndef PPN_SURROGATE_HPP
#define PPN_SURROGATE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ppn/graph.hpp"
#include "ppn/link_communities.hpp"
#include "ppn/rng.hpp"

namespace ppn {

namespace detail {

// Mutable adjacency for edge swapping: flat neighbor vectors for fast
// traversal, a hash set of packed endpoint keys for O(1) membership tests,
// and an indexed edge list for uniform sampling.
struct SwapState {
  std::vector<std::vector<NodeIndex>> adj;
  std::unordered_set<std::uint64_t> edge_keys;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  std::vector<NodeIndex> search_stack;
  std::vector<std::uint32_t> visited;
  std::uint32_t epoch = 0;
  std::uint64_t n = 0;

  explicit SwapState(const SimpleGraph& g)
      : adj(static_cast<std::size_t>(g.num_nodes)),
        edges(g.edges),
        visited(static_cast<std::size_t>(g.num_nodes), 0),
        n(static_cast<std::uint64_t>(g.num_nodes)) {
    search_stack.reserve(static_cast<std::size_t>(g.num_nodes));
    edge_keys.reserve(2 * g.edges.size());
    for (auto [u, v] : g.edges) {
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
      edge_keys.insert(key(u, v));
    }
  }

  std::uint64_t key(NodeIndex a, NodeIndex b) const {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * n + static_cast<std::uint64_t>(b);
  }
  bool has(NodeIndex a, NodeIndex b) const { return edge_keys.count(key(a, b)) > 0; }

  void add(NodeIndex a, NodeIndex b) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
    edge_keys.insert(key(a, b));
  }
  void remove(NodeIndex a, NodeIndex b) {
    drop_neighbor(a, b);
    drop_neighbor(b, a);
    edge_keys.erase(key(a, b));
  }
  void drop_neighbor(NodeIndex from, NodeIndex who) {
    auto& nbrs = adj[static_cast<std::size_t>(from)];
    for (auto& w : nbrs) {
      if (w == who) {
        w = nbrs.back();
        nbrs.pop_back();
        return;
      }
    }
  }

  // Whether `target` is reachable from `source`, early-exiting on success.
  bool reaches(NodeIndex source, NodeIndex target) {
    ++epoch;
    search_stack.clear();
    search_stack.push_back(source);
    visited[static_cast<std::size_t>(source)] = epoch;
    while (!search_stack.empty()) {
      NodeIndex v = search_stack.back();
      search_stack.pop_back();
      for (NodeIndex w : adj[static_cast<std::size_t>(v)]) {
        if (w == target) return true;
        if (visited[static_cast<std::size_t>(w)] != epoch) {
          visited[static_cast<std::size_t>(w)] = epoch;
          search_stack.push_back(w);
        }
      }
    }
    return false;
  }
};

}  // namespace detail

// Degree-preserving randomization by connectivity-preserving double edge
// swaps, starting from the reference graph. swap_factor_q * |E| attempts are
// made; an attempt picks two distinct edges (a,b),(c,d) and an orientation,
// rewires to (a,c),(b,d), and is rejected if that would create a self-loop, a
// parallel edge, or disconnect the graph (checked by BFS, reverted on
// failure). Graphs with fewer than two edges are returned unchanged.
inline SimpleGraph sample_surrogate(const SimpleGraph& reference, SplitMix64& rng,
                                    int swap_factor_q = 10) {
  if (reference.num_nodes >= 2 && !is_connected(reference))
    throw std::invalid_argument("sample_surrogate: reference graph must be connected");
  if (swap_factor_q < 0)
    throw std::invalid_argument("sample_surrogate: negative swap factor");
  const std::size_t m = reference.edges.size();
  if (m < 2) return reference;

  detail::SwapState state(reference);
  const std::uint64_t attempts =
      static_cast<std::uint64_t>(swap_factor_q) * static_cast<std::uint64_t>(m);
  for (std::uint64_t attempt = 0; attempt < attempts; ++attempt) {
    std::size_t i = static_cast<std::size_t>(rng.below(m));
    std::size_t j = static_cast<std::size_t>(rng.below(m - 1));
    if (j >= i) ++j;
    auto [a, b] = state.edges[i];
    auto [c, d] = state.edges[j];
    if (rng.below(2) == 1) std::swap(c, d);
    // Proposed replacement: (a,c) and (b,d).
    if (a == c || b == d) continue;
    if (state.has(a, c) || state.has(b, d)) continue;
    state.remove(a, b);
    state.remove(c, d);
    state.add(a, c);
    state.add(b, d);
    // The whole graph stays connected iff b is still reachable from a: c and
    // d hang off the new edges (a,c) and (b,d), and any path that used a
    // removed edge can detour through a..b once those four nodes are in one
    // component.
    if (!state.reaches(a, b)) {
      state.remove(a, c);
      state.remove(b, d);
      state.add(a, b);
      state.add(c, d);
      continue;
    }
    state.edges[i] = {a, c};
    state.edges[j] = {b, d};
  }
  return SimpleGraph::from_edge_list(reference.num_nodes, std::move(state.edges));
}

struct SurrogateResult {
  double m_orig = 0.0;
  std::vector<double> surrogate_values;  // by realization index
  double mu_surr = 0.0;
  double sigma_surr = 0.0;  // population convention (1/n_s)
  double s_score = 0.0;     // +infinity when sigma_surr = 0 and m_orig != mu_surr
  bool rejected = false;
  std::size_t n_s = 0;
  std::uint64_t master_seed = 0;
  int swap_factor_q = 0;
  double rejection_threshold = 2.0;
};

// Folds m_orig against the surrogate statistics. If every surrogate value is
// identical the spread is exactly zero: S is then 0 (statistic matched) or
// +infinity (it cannot be matched), reported explicitly either way.
inline void summarize_surrogates(SurrogateResult& r) {
  const std::size_t n = r.surrogate_values.size();
  bool all_equal = true;
  for (double v : r.surrogate_values)
    if (v != r.surrogate_values.front()) { all_equal = false; break; }
  if (all_equal) {
    r.mu_surr = r.surrogate_values.front();
    r.sigma_surr = 0.0;
    if (r.m_orig == r.mu_surr) {
      r.s_score = 0.0;
      r.rejected = false;
    } else {
      r.s_score = std::numeric_limits<double>::infinity();
      r.rejected = true;
    }
    return;
  }
  double mean = 0.0;
  for (double v : r.surrogate_values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : r.surrogate_values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  r.mu_surr = mean;
  r.sigma_surr = std::sqrt(var);
  r.s_score = std::abs(r.m_orig - r.mu_surr) / r.sigma_surr;
  r.rejected = r.s_score > r.rejection_threshold;
}

// Parametric surrogate test: S = |m_orig - mu_surr| / sigma_surr, rejecting
// the null when S exceeds the threshold (2 by default). Realization i draws
// from the sub-stream derived from (master_seed, i), so the result is
// identical for any thread count or evaluation order.
inline SurrogateResult surrogate_test(
    const SimpleGraph& graph,
    const std::function<double(const SimpleGraph&)>& statistic,
    std::size_t n_s, std::uint64_t master_seed, int swap_factor_q = 10,
    double rejection_threshold = 2.0, unsigned num_threads = 0) {
  if (n_s < 2) throw std::invalid_argument("surrogate_test: need n_s >= 2");
  SurrogateResult result;
  result.m_orig = statistic(graph);
  result.surrogate_values.assign(n_s, 0.0);
  result.n_s = n_s;
  result.master_seed = master_seed;
  result.swap_factor_q = swap_factor_q;
  result.rejection_threshold = rejection_threshold;

  if (num_threads == 0) {
    num_threads = std::max(1u, std::thread::hardware_concurrency());
  }
  num_threads = std::min<unsigned>(num_threads, static_cast<unsigned>(n_s));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    try {
      for (std::size_t i = next.fetch_add(1); i < n_s; i = next.fetch_add(1)) {
        SplitMix64 rng(SplitMix64::derive(master_seed, i));
        SimpleGraph surrogate = sample_surrogate(graph, rng, swap_factor_q);
        result.surrogate_values[i] = statistic(surrogate);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (num_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(num_threads);
    for (unsigned t = 0; t < num_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  summarize_surrogates(result);
  return result;
}

// The discriminant statistic used throughout: maximum partition density of
// the link-community dendrogram.
inline double max_partition_density_statistic(const SimpleGraph& g) {
  Dendrogram dendro = cluster_links(g);
  return best_partition(g, dendro).density;
}

}  // namespace ppn

#endif  // PPN_SURROGATE_HPP
