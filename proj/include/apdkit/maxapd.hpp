#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

// Unit-cost noah's-ark instance: binary tree, survival probabilities p_S,
// budget k, diversity target D.
struct NapInstance {
  PhyloNetwork tree;
  std::map<std::string, Rational> survival;  // taxon -> p_S in (0,1]
  int k = 0;
  Rational d = 0;
};

// Expected PD of keeping S when each kept taxon x survives independently
// with probability p_S(x): sum_e w(e) * (1 - prod_{x in S below e} (1-p_S(x))).
inline Rational epd(const NapInstance& nap, const TaxonSet& s) {
  const PhyloNetwork& t = nap.tree;
  if (!t.reticulations().empty()) throw PreconditionError("epd: instance is not a tree");
  auto order = t.topological_order();
  if (!order) throw PreconditionError("epd: cyclic input");
  std::vector<Rational> miss(t.num_nodes(), 1);  // P(no kept taxon below survives)
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    NodeId v = *it;
    if (t.is_leaf(v)) {
      if (s.count(v)) {
        auto ps = nap.survival.find(t.node(v).taxon);
        if (ps == nap.survival.end())
          throw InputError("epd: no survival probability for taxon '" + t.node(v).taxon + "'");
        miss[v] = Rational(1) - ps->second;
      }
    } else {
      for (int e : t.out_edges(v)) miss[v] *= miss[t.edge(e).head];
    }
  }
  Rational total = 0;
  for (int e = 0; e < t.num_edges(); ++e)
    total += t.edge(e).weight * (Rational(1) - miss[t.edge(e).head]);
  return total;
}

struct MaxApdResult {
  std::vector<std::string> taxa;  // sorted names
  TaxonSet set;
  Rational value = 0;
};

using ApdEngineFn = std::function<Rational(const PhyloNetwork&)>;

// APD of a taxon subset: the engine runs on the subnetwork induced by Z.
inline Rational apd_of_subset(const PhyloNetwork& net, const TaxonSet& z, const ApdEngineFn& apd) {
  if (z.empty()) return 0;
  return apd(induce(net, z).net);
}

// Exhaustive Max-APD over all subsets of size <= k, visited in lexicographic
// order of sorted taxon names; the first maximizer found wins, so ties break
// lexicographically. Desk scale only.
inline MaxApdResult max_apd_exact(const PhyloNetwork& net, int k, const ApdEngineFn& apd,
                                  std::uint64_t subset_cap = std::uint64_t{1} << 20) {
  std::vector<std::string> names;
  for (NodeId v : net.leaves()) names.push_back(net.node(v).taxon);
  std::sort(names.begin(), names.end());
  int n = static_cast<int>(names.size());
  if (k > n) throw InputError("max_apd: k exceeds the number of taxa");

  std::uint64_t count = 0, layer = 1;
  for (int i = 1; i <= k; ++i) {
    layer = layer * (n - i + 1) / i;
    count += layer;
    if (count > subset_cap)
      throw ResourceError("max_apd_exact: more than " + std::to_string(subset_cap) +
                          " candidate subsets");
  }

  MaxApdResult best;  // empty set, value 0
  std::vector<int> chosen;
  auto rec = [&](auto&& self, int start) -> void {
    for (int i = start; i < n; ++i) {
      chosen.push_back(i);
      TaxonSet z;
      for (int j : chosen) z.insert(net.node_by_taxon(names[j]));
      Rational value = apd_of_subset(net, z, apd);
      if (value > best.value) {  // strict: earlier (lexicographic) ties win
        best.set = z;
        best.taxa.clear();
        for (int j : chosen) best.taxa.push_back(names[j]);
        best.value = value;
      }
      if (static_cast<int>(chosen.size()) < k) self(self, i + 1);
      chosen.pop_back();
    }
  };
  if (k > 0 && n > 0) rec(rec, 0);
  return best;
}

// Greedy Max-APD: k rounds, each adding the taxon with the largest marginal
// gain (ties by name). Exact on trees; a baseline elsewhere.
inline MaxApdResult max_apd_greedy(const PhyloNetwork& net, int k, const ApdEngineFn& apd) {
  std::vector<std::string> names;
  for (NodeId v : net.leaves()) names.push_back(net.node(v).taxon);
  std::sort(names.begin(), names.end());
  if (k > static_cast<int>(names.size())) throw InputError("max_apd: k exceeds the number of taxa");

  MaxApdResult result;
  std::map<TaxonSet, Rational> cache;  // induced-subnetwork APD by frozen subset
  auto value_of = [&](const TaxonSet& z) {
    auto it = cache.find(z);
    if (it == cache.end()) it = cache.emplace(z, apd_of_subset(net, z, apd)).first;
    return it->second;
  };

  for (int round = 0; round < k; ++round) {
    std::string best_name;
    Rational best_value = result.value;
    TaxonSet best_set;
    for (const std::string& name : names) {
      NodeId leaf = net.node_by_taxon(name);
      if (result.set.count(leaf)) continue;
      TaxonSet candidate = result.set;
      candidate.insert(leaf);
      Rational value = value_of(candidate);
      if (best_name.empty() || value > best_value) {
        best_name = name;
        best_value = value;
        best_set = std::move(candidate);
      }
    }
    if (best_name.empty()) break;
    result.set = std::move(best_set);
    result.taxa.push_back(best_name);
    result.value = best_value;
  }
  std::sort(result.taxa.begin(), result.taxa.end());
  return result;
}

// Hard Max-APD instance built from a unit-cost instance: a binary scanwidth-3
// network on two copies of the tree with a 4-node gadget per taxon, such
// that APD of {delta_x : x in S} + {beta_x : all x} equals
// EPD(S) + M*(k + 2|X| + 1) with M the tree's total edge weight.
struct MaxApdInstance {
  PhyloNetwork net;
  int k_prime = 0;
  Rational d_prime = 0;
  Rational m = 0;              // total edge weight of the source tree
  TreeExtension extension;     // explicit width-3 certificate
  std::vector<std::string> taxa;  // source taxa, sorted
};

inline MaxApdInstance construct_hardness_instance(const NapInstance& nap) {
  const PhyloNetwork& t = nap.tree;
  if (!t.reticulations().empty())
    throw InputError("hardness construction: input is not a tree");
  for (NodeId v = 0; v < t.num_nodes(); ++v)
    if (t.out_degree(v) > 2)
      throw InputError("hardness construction: tree is not binary at node " + std::to_string(v));
  if (nap.d <= 1) throw InputError("hardness construction requires D > 1");
  if (t.num_edges() == 0) throw InputError("hardness construction: tree has no edges");

  Rational m = t.total_edge_weight();
  if (m < 1) throw InputError("hardness construction requires total tree weight >= 1");
  for (NodeId v : t.leaves()) {
    auto ps = nap.survival.find(t.node(v).taxon);
    if (ps == nap.survival.end())
      throw InputError("no survival probability for taxon '" + t.node(v).taxon + "'");
    if (ps->second <= 0 || ps->second >= 1)
      throw InputError("survival probability of '" + t.node(v).taxon +
                       "' must lie strictly between 0 and 1");
  }

  MaxApdInstance out;
  out.m = m;
  out.k_prime = nap.k + static_cast<int>(t.leaves().size());
  out.d_prime = nap.d + m * (nap.k + 2 * static_cast<int>(t.leaves().size()) + 1);

  PhyloNetwork& net = out.net;
  // The two tree copies hang under a fresh zero-weight root so the result
  // stays binary even though both copies share the original root's role.
  NodeId fresh_root = net.add_node({}, "R");
  std::vector<NodeId> copy1(t.num_nodes()), copy2(t.num_nodes());
  for (NodeId v = 0; v < t.num_nodes(); ++v) {
    std::string base = t.is_leaf(v) ? t.node(v).taxon : t.node(v).name;
    if (base.empty()) base = "n" + std::to_string(v);
    copy1[v] = net.add_node({}, base);
    copy2[v] = net.add_node({}, base + "'");
  }
  net.add_edge(fresh_root, copy1[t.root()], 0);
  net.add_edge(fresh_root, copy2[t.root()], 0);
  for (int e = 0; e < t.num_edges(); ++e) {
    const Edge& ed = t.edge(e);
    net.add_edge(copy1[ed.tail], copy1[ed.head], ed.weight);
    net.add_edge(copy2[ed.tail], copy2[ed.head], ed.weight);
  }

  std::vector<NodeId> gamma_of(t.num_nodes(), kNoNode), delta_of(t.num_nodes(), kNoNode),
      alpha_of(t.num_nodes(), kNoNode), beta_of(t.num_nodes(), kNoNode);
  for (NodeId x : t.leaves()) {
    const std::string& name = t.node(x).taxon;
    const Rational& ps = nap.survival.at(name);
    NodeId alpha = net.add_node("alpha_" + name);
    NodeId beta = net.add_node("beta_" + name);
    NodeId gamma = net.add_node({}, "gamma_" + name);
    NodeId delta = net.add_node("delta_" + name);
    alpha_of[x] = alpha;
    beta_of[x] = beta;
    gamma_of[x] = gamma;
    delta_of[x] = delta;
    net.add_edge(copy1[x], gamma, 1, ps);
    net.add_edge(copy2[x], gamma, 1, Rational(1) - ps);
    net.add_edge(copy1[x], alpha, 1);
    net.add_edge(gamma, delta, m - 1);
    net.add_edge(copy2[x], beta, 2 * m);
    out.taxa.push_back(name);
  }
  std::sort(out.taxa.begin(), out.taxa.end());
  net.finalize();

  // Width-3 tree-extension: R -> root-copy-2 -> root-copy-1, each tree edge
  // uv subdivided by the second copy of v, gadget nodes under the leaves.
  TreeExtension& ext = out.extension;
  ext.parent.assign(net.num_nodes(), kNoNode);
  ext.parent[copy2[t.root()]] = fresh_root;
  ext.parent[copy1[t.root()]] = copy2[t.root()];
  for (int e = 0; e < t.num_edges(); ++e) {
    const Edge& ed = t.edge(e);
    ext.parent[copy2[ed.head]] = copy1[ed.tail];
    ext.parent[copy1[ed.head]] = copy2[ed.head];
  }
  for (NodeId x : t.leaves()) {
    ext.parent[beta_of[x]] = copy2[x];
    ext.parent[alpha_of[x]] = copy1[x];
    ext.parent[gamma_of[x]] = copy1[x];
    ext.parent[delta_of[x]] = gamma_of[x];
  }
  return out;
}

}  // namespace apdkit
