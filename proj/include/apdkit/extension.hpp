#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

// Rooted tree on V(N) whose ancestor relation extends the network's and
// whose leaves are exactly the network's leaves.
struct TreeExtension {
  std::vector<NodeId> parent;  // kNoNode for the root

  int size() const { return static_cast<int>(parent.size()); }

  NodeId root() const {
    for (NodeId v = 0; v < size(); ++v)
      if (parent[v] == kNoNode) return v;
    throw ContractError("tree extension has no root");
  }

  // Children lists in deterministic (ascending id) order.
  std::vector<std::vector<NodeId>> children() const {
    std::vector<std::vector<NodeId>> ch(size());
    for (NodeId v = 0; v < size(); ++v)
      if (parent[v] != kNoNode) ch[parent[v]].push_back(v);
    return ch;
  }

  // Nodes in an order where parents precede children.
  std::vector<NodeId> preorder() const {
    auto ch = children();
    std::vector<NodeId> order{root()};
    order.reserve(size());
    for (size_t i = 0; i < order.size(); ++i)
      for (NodeId c : ch[order[i]]) order.push_back(c);
    if (static_cast<int>(order.size()) != size())
      throw ContractError("tree extension is not connected");
    return order;
  }
};

struct ExtensionDiagnostics {
  bool valid = true;
  std::vector<std::string> violations;
};

inline ExtensionDiagnostics validate_extension(const PhyloNetwork& net, const TreeExtension& ext) {
  ExtensionDiagnostics diag;
  auto fail = [&](std::string msg) {
    diag.valid = false;
    diag.violations.push_back(std::move(msg));
  };
  if (ext.size() != net.num_nodes()) {
    fail("extension node count " + std::to_string(ext.size()) + " != network node count " +
         std::to_string(net.num_nodes()));
    return diag;
  }

  int roots = 0;
  for (NodeId v = 0; v < ext.size(); ++v)
    if (ext.parent[v] == kNoNode) ++roots;
  if (roots != 1) {
    fail("extension must have exactly one root, found " + std::to_string(roots));
    return diag;
  }
  // Acyclicity / connectivity: every node must reach the root by parents.
  for (NodeId v = 0; v < ext.size(); ++v) {
    NodeId u = v;
    for (int steps = 0; ext.parent[u] != kNoNode; ++steps) {
      if (steps > ext.size()) {
        fail("extension parent pointers contain a cycle");
        return diag;
      }
      u = ext.parent[u];
    }
  }

  // Depths for O(1) ancestor checks below.
  std::vector<int> depth(ext.size(), -1);
  for (NodeId v : ext.preorder())
    depth[v] = ext.parent[v] == kNoNode ? 0 : depth[ext.parent[v]] + 1;

  auto is_ancestor = [&](NodeId a, NodeId d) {
    while (depth[d] > depth[a]) d = ext.parent[d];
    return a == d;
  };

  std::vector<char> has_child(ext.size(), 0);
  for (NodeId v = 0; v < ext.size(); ++v)
    if (ext.parent[v] != kNoNode) has_child[ext.parent[v]] = 1;
  for (NodeId v = 0; v < ext.size(); ++v) {
    bool net_leaf = net.is_leaf(v);
    bool ext_leaf = !has_child[v];
    if (net_leaf != ext_leaf)
      fail("node " + std::to_string(v) + (net_leaf ? " is a network leaf but internal in the extension"
                                                   : " is an extension leaf but internal in the network"));
  }

  for (int e = 0; e < net.num_edges(); ++e) {
    NodeId u = net.edge(e).tail, w = net.edge(e).head;
    if (u == w || !is_ancestor(u, w) )
      fail("network edge " + std::to_string(u) + "->" + std::to_string(w) +
           " is not an ancestor pair in the extension");
  }
  return diag;
}

// Bag GW(v): network edges uw with u strictly above v and w at-or-below v
// in the extension. Computed bottom-up:
//   GW(v) = (union of child bags + in-edges of v) \ {edges with tail v}.
// The direct ancestor-test formula is kept in tests as a cross-check.
inline std::vector<std::vector<int>> bags(const PhyloNetwork& net, const TreeExtension& ext) {
  auto order = ext.preorder();
  auto ch = ext.children();
  std::vector<std::vector<int>> bag(net.num_nodes());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    std::vector<int> merged;
    for (NodeId c : ch[v]) merged.insert(merged.end(), bag[c].begin(), bag[c].end());
    for (int e : net.in_edges(v)) merged.push_back(e);
    std::vector<int> filtered;
    filtered.reserve(merged.size());
    for (int e : merged)
      if (net.edge(e).tail != v) filtered.push_back(e);
    std::sort(filtered.begin(), filtered.end());
    filtered.erase(std::unique(filtered.begin(), filtered.end()), filtered.end());
    bag[v] = std::move(filtered);
  }
  return bag;
}

inline int width(const PhyloNetwork& net, const TreeExtension& ext) {
  int w = 0;
  for (const auto& b : bags(net, ext)) w = std::max(w, static_cast<int>(b.size()));
  return w;
}

namespace detail {

// Canonical tree from a bottom-up linear order: each node adopts the roots
// of the current forest components that contain one of its network children.
inline TreeExtension extension_from_order(const PhyloNetwork& net,
                                          const std::vector<NodeId>& bottom_up) {
  int n = net.num_nodes();
  TreeExtension ext;
  ext.parent.assign(n, kNoNode);
  std::vector<NodeId> comp_root(n, kNoNode);  // DSU by path halving
  std::vector<NodeId> dsu(n);
  std::iota(dsu.begin(), dsu.end(), 0);
  auto find = [&](NodeId v) {
    while (dsu[v] != v) v = dsu[v] = dsu[dsu[v]];
    return v;
  };
  for (NodeId v : bottom_up) {
    comp_root[find(v)] = v;
    for (int e : net.out_edges(v)) {
      NodeId c = find(net.edge(e).head);
      if (c == find(v)) continue;
      ext.parent[comp_root[c]] = v;
      dsu[c] = find(v);
      comp_root[find(v)] = v;
    }
  }
  return ext;
}

// Running bag of the node placed at each step of a bottom-up order; the
// incremental form of |GW(v)| used by the search and the heuristic.
struct OrderWidthTracker {
  const PhyloNetwork* net;  // pointer so snapshots of the tracker are assignable
  std::vector<NodeId> dsu;
  std::vector<std::vector<int>> open;  // per component root: open edge list

  explicit OrderWidthTracker(const PhyloNetwork& n) : net(&n), dsu(n.num_nodes()) {
    std::iota(dsu.begin(), dsu.end(), 0);
    open.assign(n.num_nodes(), {});
  }

  NodeId find(NodeId v) {
    while (dsu[v] != v) v = dsu[v] = dsu[dsu[v]];
    return v;
  }

  // Places v (all network children already placed); returns |GW(v)|.
  int place(NodeId v) {
    std::vector<int> merged;
    for (int e : net->out_edges(v)) {
      NodeId c = find(net->edge(e).head);
      if (c == find(v)) continue;
      merged.insert(merged.end(), open[c].begin(), open[c].end());
      open[c].clear();
      dsu[c] = find(v);
    }
    for (int e : net->in_edges(v)) merged.push_back(e);
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::vector<int> kept;
    kept.reserve(merged.size());
    for (int e : merged)
      if (net->edge(e).tail != v) kept.push_back(e);
    int bag_size = static_cast<int>(kept.size());
    open[find(v)] = std::move(kept);
    return bag_size;
  }
};

}  // namespace detail

struct ScanwidthResult {
  TreeExtension extension;
  int width = 0;
};

// Greedy bottom-up ordering minimizing the running bag size, ties broken by
// lowest node id. Deterministic; width is an upper bound on the scanwidth.
inline ScanwidthResult scanwidth_heuristic(const PhyloNetwork& net) {
  int n = net.num_nodes();
  if (n == 0) throw InputError("scanwidth of empty network");
  std::vector<int> pending(n);
  for (NodeId v = 0; v < n; ++v) pending[v] = net.out_degree(v);
  std::vector<NodeId> order;
  order.reserve(n);
  detail::OrderWidthTracker tracker(net);
  int best_width = 0;
  std::vector<char> placed(n, 0);
  for (int step = 0; step < n; ++step) {
    NodeId best = kNoNode;
    int best_bag = -1;
    for (NodeId v = 0; v < n; ++v) {
      if (placed[v] || pending[v] > 0) continue;
      detail::OrderWidthTracker probe = tracker;
      int bag = probe.place(v);
      if (best == kNoNode || bag < best_bag) {
        best = v;
        best_bag = bag;
      }
    }
    if (best == kNoNode) throw PreconditionError("scanwidth: network is cyclic");
    best_width = std::max(best_width, tracker.place(best));
    placed[best] = 1;
    order.push_back(best);
    for (int e : net.in_edges(best)) --pending[net.edge(e).tail];
  }
  return {detail::extension_from_order(net, order), best_width};
}

namespace detail {

struct ScanwidthSearch {
  const PhyloNetwork& net;
  int n;
  std::vector<int> pending;
  std::vector<char> placed;
  std::vector<NodeId> order, best_order;
  int upper;       // best width found so far (exclusive prune bound)
  int lower;       // structural lower bound; stop when reached
  OrderWidthTracker tracker;

  ScanwidthSearch(const PhyloNetwork& net_, int upper_, int lower_)
      : net(net_), n(net_.num_nodes()), pending(n), placed(n, 0), upper(upper_), lower(lower_),
        tracker(net_) {
    for (NodeId v = 0; v < n; ++v) pending[v] = net.out_degree(v);
  }

  bool done() const { return upper <= lower; }

  void recurse(int current_max) {
    if (static_cast<int>(order.size()) == n) {
      if (current_max < upper) {
        upper = current_max;
        best_order = order;
      }
      return;
    }
    for (NodeId v = 0; v < n && !done(); ++v) {
      if (placed[v] || pending[v] > 0) continue;
      OrderWidthTracker saved = tracker;
      int bag = tracker.place(v);
      int next_max = std::max(current_max, bag);
      if (next_max < upper) {
        placed[v] = 1;
        order.push_back(v);
        for (int e : net.in_edges(v)) --pending[net.edge(e).tail];
        recurse(next_max);
        for (int e : net.in_edges(v)) ++pending[net.edge(e).tail];
        order.pop_back();
        placed[v] = 0;
      }
      tracker = std::move(saved);
    }
  }
};

}  // namespace detail

// Exact scanwidth by branch-and-bound over bottom-up orders, seeded with the
// heuristic upper bound. Structural lower bounds: 1 for trees, 2 for level-1
// networks, 3 otherwise (scanwidth 1 <=> tree, <= 2 <=> level <= 1).
inline ScanwidthResult scanwidth_exact(const PhyloNetwork& net, int node_budget = 20) {
  if (net.num_nodes() > node_budget)
    throw ResourceError("scanwidth_exact: " + std::to_string(net.num_nodes()) +
                        " nodes exceed budget " + std::to_string(node_budget) +
                        "; use scanwidth_heuristic");
  ScanwidthResult heuristic = scanwidth_heuristic(net);
  int lvl = level(net);
  int lower = lvl == 0 ? 1 : (lvl == 1 ? 2 : 3);
  if (heuristic.width <= lower) return heuristic;

  detail::ScanwidthSearch search(net, heuristic.width, lower);
  search.recurse(0);
  if (search.best_order.empty()) return heuristic;
  return {detail::extension_from_order(net, search.best_order), search.upper};
}

}  // namespace apdkit
