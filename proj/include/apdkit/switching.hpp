#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

inline constexpr std::uint64_t kDefaultSwitchingCap = std::uint64_t{1} << 24;

// A (partial) switching: one chosen in-edge per reticulation in scope.
struct SwitchingMask {
  std::map<NodeId, int> choices;  // reticulation -> chosen in-edge index

  bool switches(NodeId r) const { return choices.count(r) > 0; }

  // True iff the edge survives under this mask.
  bool keeps_edge(const PhyloNetwork& net, int e) const {
    auto it = choices.find(net.edge(e).head);
    return it == choices.end() || it->second == e;
  }
};

inline void check_mask(const PhyloNetwork& net, const SwitchingMask& mask) {
  for (const auto& [r, e] : mask.choices) {
    if (!net.is_reticulation(r))
      throw ContractError("switching scope contains non-reticulation " + std::to_string(r));
    if (net.edge(e).head != r)
      throw ContractError("chosen edge does not enter reticulation " + std::to_string(r));
  }
}

inline std::uint64_t switching_count(const PhyloNetwork& net, const std::vector<NodeId>& scope,
                                     std::uint64_t cap = kDefaultSwitchingCap) {
  std::uint64_t count = 1;
  for (NodeId r : scope) {
    count *= static_cast<std::uint64_t>(net.in_degree(r));
    if (count > cap)
      throw ResourceError("switching enumeration over " + std::to_string(scope.size()) +
                          " reticulations exceeds cap of " + std::to_string(cap));
  }
  return count;
}

// Visits all switchings over the given reticulation scope in lexicographic
// (reticulation id, in-edge index) order.
inline void enumerate_switchings(const PhyloNetwork& net, std::vector<NodeId> scope,
                                 const std::function<void(const SwitchingMask&)>& visit,
                                 std::uint64_t cap = kDefaultSwitchingCap) {
  std::sort(scope.begin(), scope.end());
  for (NodeId r : scope)
    if (!net.is_reticulation(r))
      throw ContractError("enumerate_switchings: scope node " + std::to_string(r) +
                          " is not a reticulation");
  switching_count(net, scope, cap);

  SwitchingMask mask;
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == scope.size()) {
      visit(mask);
      return;
    }
    NodeId r = scope[i];
    std::vector<int> in = net.in_edges(r);
    std::sort(in.begin(), in.end());
    for (int e : in) {
      mask.choices[r] = e;
      rec(i + 1);
    }
    mask.choices.erase(r);
  };
  rec(0);
}

inline std::vector<SwitchingMask> all_switchings(const PhyloNetwork& net, std::vector<NodeId> scope,
                                                 std::uint64_t cap = kDefaultSwitchingCap) {
  std::vector<SwitchingMask> result;
  enumerate_switchings(net, std::move(scope), [&](const SwitchingMask& m) { result.push_back(m); },
                       cap);
  return result;
}

// P(sigma): product of the chosen in-edge probabilities over the scope.
inline Rational switching_probability(const PhyloNetwork& net, const SwitchingMask& mask) {
  check_mask(net, mask);
  Rational p = 1;
  for (const auto& [r, e] : mask.choices) p *= net.edge(e).prob;
  return p;
}

// Per-edge flag: does e survive the mask and have a path from its head to Z
// inside the switching? One reverse sweep from Z.
inline std::vector<char> edge_reaches(const PhyloNetwork& net, const SwitchingMask& mask,
                                      const TaxonSet& z) {
  std::vector<char> node_reach(net.num_nodes(), 0);
  std::vector<NodeId> stack;
  for (NodeId t : z) {
    node_reach[t] = 1;
    stack.push_back(t);
  }
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (int e : net.in_edges(u)) {
      if (!mask.keeps_edge(net, e)) continue;
      NodeId t = net.edge(e).tail;
      if (!node_reach[t]) {
        node_reach[t] = 1;
        stack.push_back(t);
      }
    }
  }
  std::vector<char> result(net.num_edges(), 0);
  for (int e = 0; e < net.num_edges(); ++e)
    result[e] = mask.keeps_edge(net, e) && node_reach[net.edge(e).head];
  return result;
}

// PD of Z in one full switching: total weight of surviving edges that lie on
// a path to a leaf in Z.
inline Rational pd_score(const PhyloNetwork& net, const SwitchingMask& mask, const TaxonSet& z) {
  check_mask(net, mask);
  for (NodeId r : net.reticulations())
    if (!mask.switches(r))
      throw ContractError("pd_score requires a full switching; reticulation " + std::to_string(r) +
                          " is unswitched");
  std::vector<char> counts = edge_reaches(net, mask, z);
  Rational total = 0;
  for (int e = 0; e < net.num_edges(); ++e)
    if (counts[e]) total += net.edge(e).weight;
  return total;
}

// APD(Z) by explicit enumeration of all full switchings.
inline Rational apd_bruteforce(const PhyloNetwork& net, const TaxonSet& z,
                               std::uint64_t cap = kDefaultSwitchingCap) {
  Rational total = 0;
  enumerate_switchings(net, net.reticulations(),
                       [&](const SwitchingMask& m) {
                         total += switching_probability(net, m) * pd_score(net, m, z);
                       },
                       cap);
  return total;
}

// gamma(uv, Z): probability that a random switching contains a path starting
// with the edge and ending in Z.
inline Rational gamma_bruteforce(const PhyloNetwork& net, int edge, const TaxonSet& z,
                                 std::uint64_t cap = kDefaultSwitchingCap) {
  if (edge < 0 || edge >= net.num_edges()) throw InputError("unknown edge index");
  Rational total = 0;
  enumerate_switchings(net, net.reticulations(),
                       [&](const SwitchingMask& m) {
                         if (edge_reaches(net, m, z)[edge]) total += switching_probability(net, m);
                       },
                       cap);
  return total;
}

// The combine operator on disjoint-scope masks; probabilities multiply.
inline SwitchingMask combine(const SwitchingMask& a, const SwitchingMask& b) {
  SwitchingMask merged = a;
  for (const auto& [r, e] : b.choices)
    if (!merged.choices.emplace(r, e).second)
      throw ContractError("combine: overlapping switching scopes at reticulation " +
                          std::to_string(r));
  return merged;
}

// (v, A, Y)-compatibility of a full switching: over the edge universe
// GW(v) (intersected with GW(A) when A is given), an edge has a switching
// path to the taxa iff it is selected by Y.
inline bool is_compatible(const PhyloNetwork& net, const SwitchingMask& mask, NodeId v,
                          const TreeExtension& ext, const std::vector<int>& selected,
                          const std::vector<NodeId>* a_nodes = nullptr) {
  auto bag = bags(net, ext);
  std::vector<int> universe = bag[v];
  if (a_nodes) {
    std::vector<char> in_a(net.num_edges(), 0);
    for (NodeId u : *a_nodes)
      for (int e : bag[u]) in_a[e] = 1;
    std::vector<int> filtered;
    for (int e : universe)
      if (in_a[e]) filtered.push_back(e);
    universe = std::move(filtered);
  }
  std::vector<char> in_universe(net.num_edges(), 0);
  for (int e : universe) in_universe[e] = 1;
  for (int e : selected)
    if (!in_universe[e])
      throw ContractError("is_compatible: selected edge " + std::to_string(e) +
                          " lies outside the bag universe");
  std::vector<char> in_y(net.num_edges(), 0);
  for (int e : selected) in_y[e] = 1;
  std::vector<char> reach = edge_reaches(net, mask, all_taxa(net));
  for (int e : universe)
    if (static_cast<bool>(reach[e]) != static_cast<bool>(in_y[e])) return false;
  return true;
}

}  // namespace apdkit
