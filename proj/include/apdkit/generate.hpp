#pragma once

#include <random>
#include <string>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

namespace detail {

inline Rational random_weight(std::mt19937_64& rng, int max_weight = 9) {
  return std::uniform_int_distribution<int>(1, max_weight)(rng);
}

// a/10 with a in 1..9, so probabilities stay in (0,1) and pair to 1 exactly.
inline Rational random_tenth(std::mt19937_64& rng) {
  return Rational(std::uniform_int_distribution<int>(1, 9)(rng), 10);
}

inline bool has_path(const PhyloNetwork& net, NodeId from, NodeId to) {
  if (from == to) return true;
  std::vector<char> seen(net.num_nodes(), 0);
  std::vector<NodeId> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (int e : net.out_edges(u)) {
      NodeId h = net.edge(e).head;
      if (h == to) return true;
      if (!seen[h]) {
        seen[h] = 1;
        stack.push_back(h);
      }
    }
  }
  return false;
}

struct MutableNet {
  struct E {
    NodeId tail, head;
    Rational weight;
    Rational prob = 1;
  };
  std::vector<std::string> taxon;
  std::vector<E> edges;

  NodeId add(std::string t = {}) {
    taxon.push_back(std::move(t));
    return static_cast<NodeId>(taxon.size()) - 1;
  }

  PhyloNetwork finish() const {
    std::vector<int> outdeg(taxon.size(), 0);
    for (const E& e : edges) ++outdeg[e.tail];
    PhyloNetwork net;
    for (size_t v = 0; v < taxon.size(); ++v)
      net.add_node(outdeg[v] == 0 ? taxon[v] : std::string{},
                   outdeg[v] == 0 ? std::string{} : taxon[v]);
    for (const E& e : edges) net.add_edge(e.tail, e.head, e.weight, e.prob);
    net.finalize();
    return net;
  }
};

}  // namespace detail

// Random binary tree with `n_leaves` taxa t1..tn: grown by repeatedly
// splitting a uniformly chosen leaf into a cherry. Integer weights 1..9.
inline PhyloNetwork gen_tree(std::mt19937_64& rng, int n_leaves, int max_weight = 9) {
  if (n_leaves < 1) throw InputError("gen_tree: need at least one leaf");
  detail::MutableNet b;
  NodeId root = b.add("t1");
  std::vector<NodeId> leaves{root};
  (void)root;
  for (int i = 2; i <= n_leaves; ++i) {
    size_t pick = std::uniform_int_distribution<size_t>(0, leaves.size() - 1)(rng);
    NodeId old_leaf = leaves[pick];
    NodeId c1 = b.add(b.taxon[old_leaf]);
    NodeId c2 = b.add("t" + std::to_string(i));
    b.taxon[old_leaf].clear();
    b.edges.push_back({old_leaf, c1, detail::random_weight(rng, max_weight)});
    b.edges.push_back({old_leaf, c2, detail::random_weight(rng, max_weight)});
    leaves[pick] = c1;
    leaves.push_back(c2);
  }
  if (n_leaves == 1) {
    // Give the single taxon a stem so the tree has an edge.
    NodeId leaf = b.add(b.taxon[0]);
    b.taxon[0].clear();
    b.edges.push_back({0, leaf, detail::random_weight(rng, max_weight)});
  }
  return b.finish();
}

// Random level-1 network: a binary tree in which up to `n_blobs` edges are
// replaced by a single-reticulation diamond. Blobs never nest, so every
// biconnected component holds at most one reticulation.
inline PhyloNetwork gen_level1(std::mt19937_64& rng, int n_leaves, int n_blobs,
                               int max_weight = 9) {
  PhyloNetwork tree = gen_tree(rng, n_leaves, max_weight);
  detail::MutableNet b;
  for (NodeId v = 0; v < tree.num_nodes(); ++v) b.add(tree.node(v).taxon);
  for (int e = 0; e < tree.num_edges(); ++e)
    b.edges.push_back({tree.edge(e).tail, tree.edge(e).head, tree.edge(e).weight});

  std::vector<int> slots(tree.num_edges());
  for (int e = 0; e < tree.num_edges(); ++e) slots[e] = e;
  std::shuffle(slots.begin(), slots.end(), rng);
  for (int i = 0; i < n_blobs && i < static_cast<int>(slots.size()); ++i) {
    // u -> v becomes u -> top -> {l, r} -> reti -> v.
    auto& edge = b.edges[slots[i]];
    NodeId v = edge.head;
    NodeId top = b.add(), left = b.add(), right = b.add(), reti = b.add();
    Rational p = detail::random_tenth(rng);
    edge.head = top;
    b.edges.push_back({top, left, detail::random_weight(rng, max_weight)});
    b.edges.push_back({top, right, detail::random_weight(rng, max_weight)});
    b.edges.push_back({left, reti, detail::random_weight(rng, max_weight), p});
    b.edges.push_back({right, reti, detail::random_weight(rng, max_weight), Rational(1) - p});
    b.edges.push_back({reti, v, detail::random_weight(rng, max_weight)});
  }
  return b.finish();
}

// Random binary network: a binary tree plus `n_retics` cross edges. Each
// round subdivides two edges (a->b at p, c->d at q) and adds p -> q, making
// q a reticulation; pairs with a d-to-a path are rejected to stay acyclic.
// `tree_child` additionally keeps every internal node with a non-reticulation
// child, which guarantees reticulation visibility.
inline PhyloNetwork gen_network(std::mt19937_64& rng, int n_leaves, int n_retics,
                                bool tree_child = false, int max_weight = 9) {
  PhyloNetwork net = gen_tree(rng, n_leaves, max_weight);
  for (int added = 0; added < n_retics;) {
    bool done = false;
    for (int attempt = 0; attempt < 200 && !done; ++attempt) {
      int e1 = std::uniform_int_distribution<int>(0, net.num_edges() - 1)(rng);
      int e2 = std::uniform_int_distribution<int>(0, net.num_edges() - 1)(rng);
      if (e1 == e2) continue;
      NodeId a = net.edge(e1).tail, bb = net.edge(e1).head;
      NodeId c = net.edge(e2).tail, d = net.edge(e2).head;
      if (detail::has_path(net, d, a)) continue;  // p -> q would close a cycle
      if (net.is_reticulation(bb) || net.is_reticulation(d)) continue;
      if (tree_child) {
        // c keeps a non-reticulation child besides the new reticulation q.
        bool ok = false;
        for (int e : net.out_edges(c))
          if (e != e2 && !net.is_reticulation(net.edge(e).head)) ok = true;
        if (!ok) continue;
      }

      detail::MutableNet b;
      for (NodeId v = 0; v < net.num_nodes(); ++v)
        b.add(net.is_leaf(v) ? net.node(v).taxon : net.node(v).name);
      for (int e = 0; e < net.num_edges(); ++e)
        b.edges.push_back({net.edge(e).tail, net.edge(e).head, net.edge(e).weight,
                           net.edge(e).prob});
      NodeId p = b.add(), q = b.add();
      Rational pi = detail::random_tenth(rng);
      b.edges[e1].head = p;
      b.edges[e2].head = q;
      b.edges[e2].prob = pi;
      b.edges.push_back({p, bb, detail::random_weight(rng, max_weight)});
      b.edges.push_back({q, d, detail::random_weight(rng, max_weight)});
      b.edges.push_back({p, q, detail::random_weight(rng, max_weight), Rational(1) - pi});
      net = b.finish();
      done = true;
    }
    if (!done) break;  // no feasible placement left; return what we have
    ++added;
  }
  return net;
}

// Deterministic tree-child caterpillar used for the linear-scaling check:
// `units` repetitions of a spine segment with one visible reticulation each.
inline PhyloNetwork gen_tree_child_chain(int units) {
  if (units < 1) throw InputError("gen_tree_child_chain: need at least one unit");
  detail::MutableNet b;
  NodeId spine = b.add();
  NodeId prev_split = kNoNode;
  for (int i = 0; i < units; ++i) {
    NodeId split = b.add();                      // tree node feeding the reticulation
    NodeId leaf_a = b.add("a" + std::to_string(i));
    b.edges.push_back({spine, split, 1});
    b.edges.push_back({split, leaf_a, 1});
    if (prev_split != kNoNode) {
      NodeId reti = b.add();
      NodeId leaf_b = b.add("b" + std::to_string(i));
      b.edges.push_back({prev_split, reti, 1, Rational(1, 2)});
      b.edges.push_back({split, reti, 1, Rational(1, 2)});
      b.edges.push_back({reti, leaf_b, 1});
    }
    prev_split = split;
    NodeId next = b.add();
    b.edges.push_back({spine, next, 1});
    spine = next;
  }
  b.taxon[spine] = "tail";
  return b.finish();
}

// Fixed-size family with tunable extension width for the DP scaling check.
// Each of `groups` gadgets stacks `g` reticulations whose first in-edges all
// cross one point of the supplied extension, giving a bag of size g+1; spare
// plain segments pad every family member to the same node count.
struct WidthFamilyInstance {
  PhyloNetwork net;
  TreeExtension ext;
  int width = 0;
};

inline WidthFamilyInstance gen_width_family(int g, int groups, int max_g) {
  if (g < 1 || g > max_g || groups < 1) throw InputError("gen_width_family: bad parameters");
  detail::MutableNet b;
  std::vector<std::pair<NodeId, NodeId>> ext_edges;  // (parent, child) in the extension
  int leaf_id = 0;
  NodeId spine = b.add();
  NodeId ext_root = spine;

  auto grow = [&](NodeId parent) {
    NodeId v = b.add();
    ext_edges.emplace_back(parent, v);
    return v;
  };
  auto add_leaf = [&](NodeId net_parent, NodeId ext_parent) {
    NodeId l = b.add("x" + std::to_string(leaf_id++));
    b.edges.push_back({net_parent, l, 1});
    ext_edges.emplace_back(ext_parent, l);
    return l;
  };

  for (int group = 0; group < groups; ++group) {
    std::vector<NodeId> t(g), m(g), r(g);
    NodeId prev = spine;
    for (int j = 0; j < g; ++j) {
      t[j] = grow(prev);
      b.edges.push_back({prev, t[j], 1});
      prev = t[j];
    }
    for (int j = 0; j < g; ++j) {
      m[j] = grow(prev);
      b.edges.push_back({prev, m[j], 1});
      prev = m[j];
    }
    for (int j = 0; j < g; ++j) {
      r[j] = grow(m[j]);
      b.edges.push_back({t[j], r[j], 1, Rational(1, 2)});
      b.edges.push_back({m[j], r[j], 1, Rational(1, 2)});
      add_leaf(r[j], r[j]);
    }
    // Plain padding (2 nodes each, vs 4 per reticulation slot) so every
    // family member has the same node count.
    for (int j = 0; j < 2 * (max_g - g); ++j) {
      NodeId v = grow(prev);
      b.edges.push_back({prev, v, 1});
      add_leaf(v, v);
      prev = v;
    }
    spine = prev;
  }
  add_leaf(spine, spine);

  WidthFamilyInstance out;
  out.net = b.finish();
  out.ext.parent.assign(out.net.num_nodes(), kNoNode);
  for (auto [p, c] : ext_edges) out.ext.parent[c] = p;
  (void)ext_root;
  out.width = width(out.net, out.ext);
  return out;
}

}  // namespace apdkit
