#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/rational.hpp"

namespace apdkit {

using NodeId = int;
constexpr NodeId kNoNode = -1;

struct Edge {
  NodeId tail = kNoNode;
  NodeId head = kNoNode;
  Rational weight = 0;  // branch length, >= 0
  Rational prob = 1;    // inheritance probability, in (0,1]
};

enum class NodeKind { Root, Tree, Reticulation, Leaf };

struct ValidationIssue {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
  NodeId node = kNoNode;
  int edge = -1;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool valid() const {
    return std::none_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
      return i.severity == ValidationIssue::Severity::Error;
    });
  }
};

// Rooted DAG with weighted, probability-annotated edges and taxon-labeled
// leaves. Immutable after finalize(); all queries are const and pure.
class PhyloNetwork {
 public:
  struct Node {
    std::string taxon;  // nonempty exactly for leaves
    std::string name;   // optional display name, no semantics
  };

  NodeId add_node(std::string taxon = {}, std::string name = {}) {
    nodes_.push_back(Node{std::move(taxon), std::move(name)});
    return static_cast<NodeId>(nodes_.size()) - 1;
  }

  int add_edge(NodeId tail, NodeId head, Rational weight = 0, Rational prob = 1) {
    edges_.push_back(Edge{tail, head, std::move(weight), std::move(prob)});
    return static_cast<int>(edges_.size()) - 1;
  }

  void set_prob(int edge, Rational p) { edges_[edge].prob = std::move(p); }

  // Builds adjacency; must be called once after construction, before queries.
  void finalize() {
    in_.assign(nodes_.size(), {});
    out_.assign(nodes_.size(), {});
    for (int e = 0; e < num_edges(); ++e) {
      if (edges_[e].tail < 0 || edges_[e].tail >= num_nodes() ||
          edges_[e].head < 0 || edges_[e].head >= num_nodes())
        throw InputError("edge " + std::to_string(e) + " references unknown node");
      out_[edges_[e].tail].push_back(e);
      in_[edges_[e].head].push_back(e);
    }
    taxon_to_node_.clear();
    leaves_.clear();
    for (NodeId v = 0; v < num_nodes(); ++v) {
      if (out_[v].empty()) leaves_.push_back(v);
      if (!nodes_[v].taxon.empty()) taxon_to_node_.emplace(nodes_[v].taxon, v);
    }
  }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Node& node(NodeId v) const { return nodes_[v]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& in_edges(NodeId v) const { return in_[v]; }
  const std::vector<int>& out_edges(NodeId v) const { return out_[v]; }
  int in_degree(NodeId v) const { return static_cast<int>(in_[v].size()); }
  int out_degree(NodeId v) const { return static_cast<int>(out_[v].size()); }
  const std::vector<NodeId>& leaves() const { return leaves_; }

  bool is_leaf(NodeId v) const { return out_[v].empty(); }
  bool is_reticulation(NodeId v) const { return in_degree(v) >= 2; }

  NodeKind kind(NodeId v) const {
    if (in_degree(v) == 0) return NodeKind::Root;
    if (is_leaf(v)) return NodeKind::Leaf;
    if (is_reticulation(v)) return NodeKind::Reticulation;
    return NodeKind::Tree;
  }

  std::vector<NodeId> reticulations() const {
    std::vector<NodeId> r;
    for (NodeId v = 0; v < num_nodes(); ++v)
      if (is_reticulation(v)) r.push_back(v);
    return r;
  }

  NodeId root() const {
    NodeId r = kNoNode;
    for (NodeId v = 0; v < num_nodes(); ++v)
      if (in_degree(v) == 0) {
        if (r != kNoNode) throw PreconditionError("network has multiple roots");
        r = v;
      }
    if (r == kNoNode) throw PreconditionError("network has no root");
    return r;
  }

  NodeId node_by_taxon(const std::string& taxon) const {
    auto it = taxon_to_node_.find(taxon);
    if (it == taxon_to_node_.end()) throw InputError("unknown taxon '" + taxon + "'");
    return it->second;
  }

  bool has_taxon(const std::string& taxon) const { return taxon_to_node_.count(taxon) > 0; }

  Rational total_edge_weight() const {
    Rational w = 0;
    for (const Edge& e : edges_) w += e.weight;
    return w;
  }

  // Nodes ordered so every edge goes from lower to higher position.
  // Fails (returns empty optional) on cyclic inputs.
  std::optional<std::vector<NodeId>> topological_order() const {
    std::vector<int> indeg(num_nodes());
    for (NodeId v = 0; v < num_nodes(); ++v) indeg[v] = in_degree(v);
    std::vector<NodeId> order;
    order.reserve(num_nodes());
    for (NodeId v = 0; v < num_nodes(); ++v)
      if (indeg[v] == 0) order.push_back(v);
    for (size_t i = 0; i < order.size(); ++i)
      for (int e : out_[order[i]])
        if (--indeg[edges_[e].head] == 0) order.push_back(edges_[e].head);
    if (static_cast<int>(order.size()) != num_nodes()) return std::nullopt;
    return order;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_, out_;
  std::vector<NodeId> leaves_;
  std::unordered_map<std::string, NodeId> taxon_to_node_;
};

// Set of leaves of one network (the symbol Z).
using TaxonSet = std::set<NodeId>;

inline TaxonSet all_taxa(const PhyloNetwork& net) {
  return TaxonSet(net.leaves().begin(), net.leaves().end());
}

inline TaxonSet taxa_by_name(const PhyloNetwork& net, const std::vector<std::string>& names) {
  TaxonSet z;
  for (const auto& n : names) z.insert(net.node_by_taxon(n));
  return z;
}

// Lists every violated structural invariant; violations are data, not
// failures, so arbitrary candidate structures are accepted.
inline ValidationReport validate(const PhyloNetwork& net) {
  ValidationReport report;
  auto error = [&](std::string msg, NodeId v = kNoNode, int e = -1) {
    report.issues.push_back({ValidationIssue::Severity::Error, std::move(msg), v, e});
  };
  auto warning = [&](std::string msg, NodeId v = kNoNode, int e = -1) {
    report.issues.push_back({ValidationIssue::Severity::Warning, std::move(msg), v, e});
  };

  int roots = 0;
  for (NodeId v = 0; v < net.num_nodes(); ++v)
    if (net.in_degree(v) == 0) ++roots;
  if (roots != 1) error("network must have exactly one root, found " + std::to_string(roots));

  if (!net.topological_order()) error("network contains a directed cycle");

  for (NodeId v = 0; v < net.num_nodes(); ++v) {
    int din = net.in_degree(v), dout = net.out_degree(v);
    if (!(din <= 1 || (din >= 2 && dout <= 1)))
      error("node " + std::to_string(v) + " violates degree rule (in=" + std::to_string(din) +
                ", out=" + std::to_string(dout) + ")",
            v);
    bool labeled = !net.node(v).taxon.empty();
    if (net.is_leaf(v) && !labeled && net.num_nodes() > 0)
      error("leaf " + std::to_string(v) + " carries no taxon label", v);
    if (!net.is_leaf(v) && labeled)
      error("internal node " + std::to_string(v) + " carries taxon label '" + net.node(v).taxon + "'", v);
  }

  std::unordered_map<std::string, int> taxon_count;
  for (NodeId v : net.leaves())
    if (!net.node(v).taxon.empty()) ++taxon_count[net.node(v).taxon];
  for (const auto& [taxon, count] : taxon_count)
    if (count > 1) error("taxon '" + taxon + "' labels " + std::to_string(count) + " leaves");

  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edge(e);
    if (ed.weight < 0) error("edge " + std::to_string(e) + " has negative weight", kNoNode, e);
    if (ed.prob <= 0 || ed.prob > 1)
      error("edge " + std::to_string(e) + " has probability outside (0,1]", kNoNode, e);
  }

  for (NodeId v = 0; v < net.num_nodes(); ++v) {
    if (net.in_degree(v) == 0) continue;
    Rational sum = 0;
    for (int e : net.in_edges(v)) sum += net.edge(e).prob;
    if (sum != 1)
      error("in-edge probabilities of node " + std::to_string(v) + " sum to " +
                to_fraction_string(sum) + ", expected 1",
            v);
  }

  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : net.edges())
    if (!seen.insert({e.tail, e.head}).second)
      warning("parallel edges between nodes " + std::to_string(e.tail) + " and " +
              std::to_string(e.head));

  return report;
}

// All leaves reachable from v (a leaf is its own offspring).
inline TaxonSet offspring(const PhyloNetwork& net, NodeId v) {
  if (v < 0 || v >= net.num_nodes()) throw InputError("unknown node id " + std::to_string(v));
  TaxonSet result;
  std::vector<char> visited(net.num_nodes(), 0);
  std::vector<NodeId> stack{v};
  visited[v] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (net.is_leaf(u)) result.insert(u);
    for (int e : net.out_edges(u)) {
      NodeId w = net.edge(e).head;
      if (!visited[w]) {
        visited[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return result;
}

// Per-node flag: is the node reachable from v (v itself included)?
inline std::vector<char> descendants(const PhyloNetwork& net, NodeId v) {
  if (v < 0 || v >= net.num_nodes()) throw InputError("unknown node id " + std::to_string(v));
  std::vector<char> visited(net.num_nodes(), 0);
  std::vector<NodeId> stack{v};
  visited[v] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (int e : net.out_edges(u)) {
      NodeId w = net.edge(e).head;
      if (!visited[w]) {
        visited[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return visited;
}

// Per-node flag: does the node have a directed path to a leaf in Z?
inline std::vector<char> reaches_taxa(const PhyloNetwork& net, const TaxonSet& z) {
  std::vector<char> reach(net.num_nodes(), 0);
  std::vector<NodeId> stack;
  for (NodeId t : z) {
    reach[t] = 1;
    stack.push_back(t);
  }
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (int e : net.in_edges(u)) {
      NodeId t = net.edge(e).tail;
      if (!reach[t]) {
        reach[t] = 1;
        stack.push_back(t);
      }
    }
  }
  return reach;
}

struct InducedNetwork {
  PhyloNetwork net;
  std::vector<NodeId> node_map;  // induced id -> original id
};

// Deletes every node whose offspring set is disjoint from Z, with incident
// edges. Probabilities are NOT renormalized; since in-edges of surviving
// nodes always survive, the result is still normal.
inline InducedNetwork induce(const PhyloNetwork& net, const TaxonSet& z) {
  if (z.empty()) throw InputError("induce: empty taxon set");
  for (NodeId t : z) {
    if (t < 0 || t >= net.num_nodes()) throw InputError("induce: unknown node id");
    if (!net.is_leaf(t)) throw InputError("induce: node " + std::to_string(t) + " is not a leaf");
  }
  std::vector<char> keep = reaches_taxa(net, z);
  InducedNetwork result;
  std::vector<NodeId> new_id(net.num_nodes(), kNoNode);
  for (NodeId v = 0; v < net.num_nodes(); ++v)
    if (keep[v]) {
      new_id[v] = result.net.add_node(net.node(v).taxon, net.node(v).name);
      result.node_map.push_back(v);
    }
  for (const Edge& e : net.edges())
    if (keep[e.tail] && keep[e.head])
      result.net.add_edge(new_id[e.tail], new_id[e.head], e.weight, e.prob);
  result.net.finalize();
  return result;
}

// v is visible iff some leaf becomes unreachable from the root once v is
// removed. O(n*m) over all nodes; see visible_nodes for the linear path.
inline std::optional<NodeId> visible_witness(const PhyloNetwork& net, NodeId v) {
  if (v < 0 || v >= net.num_nodes()) throw InputError("unknown node id " + std::to_string(v));
  if (net.is_leaf(v)) return v;
  NodeId root = net.root();
  if (v == root) return net.leaves().empty() ? std::optional<NodeId>{} : net.leaves().front();
  std::vector<char> reached(net.num_nodes(), 0);
  std::vector<NodeId> stack{root};
  reached[root] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (int e : net.out_edges(u)) {
      NodeId w = net.edge(e).head;
      if (w != v && !reached[w]) {
        reached[w] = 1;
        stack.push_back(w);
      }
    }
  }
  for (NodeId leaf : net.leaves())
    if (!reached[leaf]) return leaf;
  return std::nullopt;
}

inline bool is_visible(const PhyloNetwork& net, NodeId v) {
  return visible_witness(net, v).has_value();
}

namespace detail {

// Immediate dominators, rooted at the network root. On a DAG a single pass
// in topological order is exact: idom(v) is the dominator-tree nearest
// common ancestor of all predecessors, which are finalized before v.
// idom[root] = root.
class DominatorTree {
 public:
  explicit DominatorTree(const PhyloNetwork& net) {
    int n = net.num_nodes();
    idom_.assign(n, kNoNode);
    depth_.assign(n, 0);
    auto order = net.topological_order();
    if (!order) throw PreconditionError("dominators: network is cyclic");
    NodeId root = net.root();
    idom_[root] = root;
    for (NodeId v : *order) {
      if (v == root) continue;
      NodeId d = kNoNode;
      for (int e : net.in_edges(v)) {
        NodeId p = net.edge(e).tail;
        d = d == kNoNode ? p : intersect(d, p);
      }
      idom_[v] = d;
      depth_[v] = depth_[d] + 1;
    }
  }

  NodeId idom(NodeId v) const { return idom_[v]; }

 private:
  NodeId intersect(NodeId a, NodeId b) const {
    while (a != b) {
      while (depth_[a] > depth_[b]) a = idom_[a];
      while (depth_[b] > depth_[a]) b = idom_[b];
      if (a != b) {
        a = idom_[a];
        b = idom_[b];
      }
    }
    return a;
  }

  std::vector<NodeId> idom_;
  std::vector<int> depth_;
};

}  // namespace detail

// Visibility of every node at once: v is visible iff v dominates some leaf,
// i.e. some leaf lies in v's dominator subtree. Near-linear via dominators;
// cross-checked against visible_witness in tests.
inline std::vector<char> visible_nodes(const PhyloNetwork& net) {
  detail::DominatorTree dom(net);
  std::vector<char> visible(net.num_nodes(), 0);
  // Propagate leaf flags up the dominator tree. idom chains are acyclic, so
  // walking up from each leaf and stopping at already-marked nodes is linear.
  for (NodeId leaf : net.leaves()) {
    NodeId v = leaf;
    while (v != kNoNode && !visible[v]) {
      visible[v] = 1;
      NodeId up = dom.idom(v);
      if (up == v) break;
      v = up;
    }
  }
  return visible;
}

inline std::vector<NodeId> invisible_reticulations(const PhyloNetwork& net) {
  std::vector<char> visible = visible_nodes(net);
  std::vector<NodeId> result;
  for (NodeId r : net.reticulations())
    if (!visible[r]) result.push_back(r);
  return result;
}

inline bool is_reticulation_visible(const PhyloNetwork& net) {
  return invisible_reticulations(net).empty();
}

struct BiconnectedComponent {
  std::vector<int> edges;
  std::vector<NodeId> nodes;
  NodeId root = kNoNode;  // unique node with no in-edge inside the component
  bool trivial() const { return edges.size() == 1; }
};

// Biconnected components of the underlying undirected multigraph, as an
// edge partition. Ordered lowest-first (reverse topological order of the
// component roots).
inline std::vector<BiconnectedComponent> biconnected_components(const PhyloNetwork& net) {
  int n = net.num_nodes(), m = net.num_edges();
  std::vector<BiconnectedComponent> comps;
  if (m == 0) return comps;

  // Undirected incidence.
  std::vector<std::vector<int>> inc(n);
  for (int e = 0; e < m; ++e) {
    inc[net.edge(e).tail].push_back(e);
    inc[net.edge(e).head].push_back(e);
  }

  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<int> edge_stack;
  int timer = 0;

  // Iterative Hopcroft-Tarjan; frames track the incidence cursor.
  struct Frame {
    NodeId v;
    int via_edge;
    size_t cursor = 0;
  };
  auto other_end = [&](int e, NodeId v) {
    const Edge& ed = net.edge(e);
    return ed.tail == v ? ed.head : ed.tail;
  };

  auto pop_component = [&](int until_edge) {
    BiconnectedComponent comp;
    std::set<NodeId> node_set;
    while (true) {
      int e = edge_stack.back();
      edge_stack.pop_back();
      comp.edges.push_back(e);
      node_set.insert(net.edge(e).tail);
      node_set.insert(net.edge(e).head);
      if (e == until_edge) break;
    }
    comp.nodes.assign(node_set.begin(), node_set.end());
    comps.push_back(std::move(comp));
  };

  for (NodeId start = 0; start < n; ++start) {
    if (disc[start] >= 0) continue;
    std::vector<Frame> frames{{start, -1}};
    disc[start] = low[start] = timer++;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.cursor < inc[f.v].size()) {
        int e = inc[f.v][f.cursor++];
        if (e == f.via_edge) continue;
        NodeId w = other_end(e, f.v);
        if (disc[w] < 0) {
          edge_stack.push_back(e);
          disc[w] = low[w] = timer++;
          frames.push_back({w, e});
        } else if (disc[w] < disc[f.v]) {
          edge_stack.push_back(e);
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        Frame done = f;
        frames.pop_back();
        if (!frames.empty()) {
          NodeId parent = frames.back().v;
          low[parent] = std::min(low[parent], low[done.v]);
          if (low[done.v] >= disc[parent]) pop_component(done.via_edge);
        }
      }
    }
  }

  // Component root: the unique component node without an in-edge inside.
  for (BiconnectedComponent& comp : comps) {
    std::set<NodeId> heads;
    for (int e : comp.edges) heads.insert(net.edge(e).head);
    for (NodeId v : comp.nodes)
      if (!heads.count(v)) {
        if (comp.root != kNoNode)
          throw ContractError("biconnected component with two source nodes");
        comp.root = v;
      }
    if (comp.root == kNoNode) throw ContractError("biconnected component without source node");
  }

  auto topo = net.topological_order();
  if (!topo) throw PreconditionError("biconnected_components: network is cyclic");
  std::vector<int> pos(n);
  for (int i = 0; i < n; ++i) pos[(*topo)[i]] = i;
  std::stable_sort(comps.begin(), comps.end(),
                   [&](const BiconnectedComponent& a, const BiconnectedComponent& b) {
                     return pos[a.root] > pos[b.root];
                   });
  return comps;
}

// Maximum number of reticulations in any biconnected component.
inline int level(const PhyloNetwork& net) {
  int lvl = 0;
  for (const BiconnectedComponent& comp : biconnected_components(net)) {
    int retics = 0;
    for (NodeId v : comp.nodes)
      if (net.is_reticulation(v) && v != comp.root) ++retics;
    lvl = std::max(lvl, retics);
  }
  return lvl;
}

}  // namespace apdkit
