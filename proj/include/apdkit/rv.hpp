#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

// Operation counter for the (soft) linearity property tests.
struct RvStats {
  long long map_ops = 0;
};

namespace detail {

// For a tree node v, the reticulations reachable by tree-paths (inner nodes
// all tree-nodes) together with S_r = sum of p_I over tree-path edges into r.
// The survival product prod(1 - S_r) is maintained incrementally; factors
// equal to zero are counted separately so no division by zero occurs.
struct TreePathMap {
  std::map<NodeId, Rational> s;
  Rational prod = 1;
  int zero_factors = 0;

  Rational survival() const { return zero_factors > 0 ? Rational(0) : prod; }

  void add(NodeId r, const Rational& p, RvStats* stats) {
    if (stats) ++stats->map_ops;
    auto [it, fresh] = s.emplace(r, p);
    if (fresh) {
      apply_factor(Rational(1) - p);
      return;
    }
    unapply_factor(Rational(1) - it->second);
    it->second += p;
    apply_factor(Rational(1) - it->second);
  }

  void merge_from(TreePathMap& other, RvStats* stats) {
    if (other.s.size() > s.size()) {
      std::swap(s, other.s);
      std::swap(prod, other.prod);
      std::swap(zero_factors, other.zero_factors);
    }
    for (auto& [r, p] : other.s) add(r, p, stats);
    other.s.clear();
  }

 private:
  void apply_factor(const Rational& f) {
    if (f == 0)
      ++zero_factors;
    else
      prod *= f;
  }
  void unapply_factor(const Rational& f) {
    if (f == 0)
      --zero_factors;
    else
      prod /= f;
  }
};

inline void require_rv(const PhyloNetwork& net, const char* who) {
  auto invisible = invisible_reticulations(net);
  if (!invisible.empty())
    throw PreconditionError(std::string(who) + ": reticulation " + std::to_string(invisible.front()) +
                            " is invisible; network is not reticulation-visible");
  std::vector<char> reach = reaches_taxa(net, all_taxa(net));
  for (NodeId v = 0; v < net.num_nodes(); ++v)
    if (!reach[v])
      throw PreconditionError(std::string(who) + ": node " + std::to_string(v) +
                              " has no path to a leaf; induce the network first");
}

}  // namespace detail

// gamma(e) for every edge of a reticulation-visible network in one reverse
// sweep: p_I(e) when the head is visible, else 1 - prod_{r}(1 - S_r) over the
// reticulations tree-path-reachable from the head.
inline std::vector<Rational> gamma_rv_all(const PhyloNetwork& net, RvStats* stats = nullptr) {
  detail::require_rv(net, "gamma_rv");
  std::vector<char> visible = visible_nodes(net);

  auto order = net.topological_order();
  if (!order) throw PreconditionError("gamma_rv: network is cyclic");

  // Each tree node has at most one parent, so child maps are consumed by
  // exactly one owner and small-to-large merging never copies. The survival
  // value is frozen per node before the parent swallows its map.
  std::vector<detail::TreePathMap> maps(net.num_nodes());
  std::vector<Rational> survival(net.num_nodes(), 1);
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    NodeId v = *it;
    if (net.is_reticulation(v)) continue;  // tree-paths end at reticulations
    for (int e : net.out_edges(v)) {
      NodeId c = net.edge(e).head;
      if (net.is_reticulation(c))
        maps[v].add(c, net.edge(e).prob, stats);
      else
        maps[v].merge_from(maps[c], stats);
    }
    survival[v] = maps[v].survival();
  }

  std::vector<Rational> gamma(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    NodeId v = net.edge(e).head;
    if (visible[v])
      gamma[e] = net.edge(e).prob;
    else
      gamma[e] = Rational(1) - survival[v];
  }
  return gamma;
}

inline Rational gamma_rv(const PhyloNetwork& net, int edge) {
  if (edge < 0 || edge >= net.num_edges()) throw InputError("unknown edge index");
  return gamma_rv_all(net)[edge];
}

// Slow per-edge closed form kept as a cross-check: explicit tree-path search
// for R_v and Q_r.
inline Rational gamma_rv_reference(const PhyloNetwork& net, int edge) {
  if (edge < 0 || edge >= net.num_edges()) throw InputError("unknown edge index");
  detail::require_rv(net, "gamma_rv");
  NodeId v = net.edge(edge).head;
  if (is_visible(net, v)) return net.edge(edge).prob;

  std::map<NodeId, Rational> s;  // reticulation -> sum of p_I over Q_r
  std::vector<char> seen(net.num_nodes(), 0);
  std::vector<NodeId> stack{v};
  seen[v] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (int e : net.out_edges(u)) {
      NodeId c = net.edge(e).head;
      if (net.is_reticulation(c)) {
        s[c] += net.edge(e).prob;  // Q_r collects every v-r tree-path edge qr
      } else if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  Rational survival = 1;
  for (const auto& [r, sum] : s) survival *= Rational(1) - sum;
  return Rational(1) - survival;
}

// APD(X_N) = sum_e omega(e) * gamma(e) on a reticulation-visible network.
inline Rational apd_rv(const PhyloNetwork& net, RvStats* stats = nullptr) {
  std::vector<Rational> gamma = gamma_rv_all(net, stats);
  Rational total = 0;
  for (int e = 0; e < net.num_edges(); ++e) total += net.edge(e).weight * gamma[e];
  return total;
}

}  // namespace apdkit
