#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

namespace detail {

template <class Num>
Num to_num(const Rational& r) {
  if constexpr (std::is_same_v<Num, Rational>)
    return r;
  else
    return r.template convert_to<Num>();
}

}  // namespace detail

// Per-node DP tables over subsets of the bag GW(v). p[Y] is the probability
// of drawing a (v,Y)-compatible switching; d[Y] the combined diversity of
// those switchings restricted to edges below GW(v). Subsets are bitmasks in
// the local index order of `bag`.
template <class Num>
struct DpTables {
  std::vector<std::vector<int>> bag;  // per node: sorted global edge ids
  std::vector<std::vector<Num>> p, d;
  Num apd{};
};

inline constexpr int kMaxBagBits = 28;

// Bottom-up table computation over a tree-extension; O(2^w * n) for width w.
// Requires a valid normal network in which every node reaches a leaf.
template <class Num = Rational>
DpTables<Num> run_dp_tables(const PhyloNetwork& net, const TreeExtension& ext) {
  {
    ExtensionDiagnostics diag = validate_extension(net, ext);
    if (!diag.valid)
      throw PreconditionError("run_dp: invalid tree extension: " + diag.violations.front());
  }
  {
    std::vector<char> reach = reaches_taxa(net, all_taxa(net));
    for (NodeId v = 0; v < net.num_nodes(); ++v)
      if (!reach[v])
        throw PreconditionError("run_dp: node " + std::to_string(v) +
                                " has no path to a leaf; induce the network first");
  }

  DpTables<Num> tables;
  tables.bag = bags(net, ext);
  tables.p.resize(net.num_nodes());
  tables.d.resize(net.num_nodes());

  auto order = ext.preorder();
  auto children = ext.children();
  NodeId ext_root = ext.root();

  std::vector<int> pos_in_bag(net.num_edges(), -1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    const std::vector<int>& bag_v = tables.bag[v];
    int bits = static_cast<int>(bag_v.size());
    if (bits > kMaxBagBits)
      throw ResourceError("run_dp: bag of node " + std::to_string(v) + " has " +
                          std::to_string(bits) + " edges; width too large");
    std::uint64_t table_size = std::uint64_t{1} << bits;
    std::vector<Num>& p_v = tables.p[v];
    std::vector<Num>& d_v = tables.d[v];
    p_v.assign(table_size, Num{});
    d_v.assign(table_size, Num{});
    for (int i = 0; i < bits; ++i) pos_in_bag[bag_v[i]] = i;

    if (children[v].empty()) {
      // Network leaf: the chosen in-edge always reaches the leaf itself.
      for (int e : net.in_edges(v)) {
        std::uint64_t mask = std::uint64_t{1} << pos_in_bag[e];
        p_v[mask] = detail::to_num<Num>(net.edge(e).prob);
        d_v[mask] = detail::to_num<Num>(net.edge(e).prob * net.edge(e).weight);
      }
    } else {
      std::uint64_t in_mask = 0;
      for (int e : net.in_edges(v)) in_mask |= std::uint64_t{1} << pos_in_bag[e];

      // Per extension-child precomputation: for each assignment c of the
      // bag edges shared with the child, the child's table value at Y_h and
      // the sums over nonempty out-edge subsets Z.
      struct ChildData {
        std::vector<int> shared_parent_bits;       // positions in bag(v)
        std::vector<std::uint64_t> child_mask_of;  // compressed c -> mask over bag(w_h)
        std::vector<Num> p0, d0, sp, sd;
      };
      std::vector<ChildData> per_child;
      per_child.reserve(children[v].size());
      int out_edges_seen = 0;

      for (NodeId w : children[v]) {
        const std::vector<int>& bag_w = tables.bag[w];
        std::vector<int> pos_in_child(net.num_edges(), -1);
        for (size_t i = 0; i < bag_w.size(); ++i) pos_in_child[bag_w[i]] = static_cast<int>(i);

        ChildData cd;
        std::vector<int> shared_child_bits;
        for (int i = 0; i < bits; ++i)
          if (pos_in_child[bag_v[i]] >= 0) {
            cd.shared_parent_bits.push_back(i);
            shared_child_bits.push_back(pos_in_child[bag_v[i]]);
          }
        std::vector<int> out_child_bits;
        for (int e : net.out_edges(v))
          if (pos_in_child[e] >= 0) {
            out_child_bits.push_back(pos_in_child[e]);
            ++out_edges_seen;
          }

        int k_shared = static_cast<int>(cd.shared_parent_bits.size());
        int k_out = static_cast<int>(out_child_bits.size());
        std::uint64_t n_shared = std::uint64_t{1} << k_shared;
        std::uint64_t n_out = std::uint64_t{1} << k_out;

        cd.child_mask_of.assign(n_shared, 0);
        for (std::uint64_t c = 1; c < n_shared; ++c) {
          std::uint64_t low = c & (c - 1);
          int bit = std::countr_zero(c);
          cd.child_mask_of[c] =
              cd.child_mask_of[low] | (std::uint64_t{1} << shared_child_bits[bit]);
        }
        std::vector<std::uint64_t> out_mask_of(n_out, 0);
        for (std::uint64_t z = 1; z < n_out; ++z) {
          std::uint64_t low = z & (z - 1);
          int bit = std::countr_zero(z);
          out_mask_of[z] = out_mask_of[low] | (std::uint64_t{1} << out_child_bits[bit]);
        }

        const std::vector<Num>& p_w = tables.p[w];
        const std::vector<Num>& d_w = tables.d[w];
        cd.p0.resize(n_shared);
        cd.d0.resize(n_shared);
        cd.sp.assign(n_shared, Num{});
        cd.sd.assign(n_shared, Num{});
        for (std::uint64_t c = 0; c < n_shared; ++c) {
          std::uint64_t base = cd.child_mask_of[c];
          cd.p0[c] = p_w[base];
          cd.d0[c] = d_w[base];
          for (std::uint64_t z = 1; z < n_out; ++z) {
            cd.sp[c] += p_w[base | out_mask_of[z]];
            cd.sd[c] += d_w[base | out_mask_of[z]];
          }
        }
        per_child.push_back(std::move(cd));
      }

      if (out_edges_seen != net.out_degree(v))
        throw ContractError("run_dp: out-edges of node " + std::to_string(v) +
                            " are not covered by its extension children");

      bool is_root = v == ext_root;
      for (std::uint64_t y = 0; y < table_size; ++y) {
        std::uint64_t y_in = y & in_mask;
        if (std::popcount(y_in) >= 2) continue;  // no compatible switching

        // Q: switchings in which v reaches no leaf below the first h
        // children; C: those in which it reaches one.
        Num qp = detail::to_num<Num>(Rational(1)), qd{}, cp{}, cd_acc{};
        for (const ChildData& cd : per_child) {
          std::uint64_t c = 0;
          for (size_t j = 0; j < cd.shared_parent_bits.size(); ++j)
            if (y >> cd.shared_parent_bits[j] & 1) c |= std::uint64_t{1} << j;
          const Num& p0 = cd.p0[c];
          const Num& d0 = cd.d0[c];
          const Num& sp = cd.sp[c];
          const Num& sd = cd.sd[c];
          Num cp_next = cp * p0 + (cp + qp) * sp;
          Num cd_next = cd_acc * p0 + d0 * cp + (cp + qp) * sd + (cd_acc + qd) * sp;
          Num qp_next = qp * p0;
          Num qd_next = qd * p0 + d0 * qp;
          cp = std::move(cp_next);
          cd_acc = std::move(cd_next);
          qp = std::move(qp_next);
          qd = std::move(qd_next);
        }

        if (y_in == 0) {
          if (is_root) {
            // The root reaches a leaf in every switching; it behaves like
            // the selected-in-edge case with a virtual zero-weight edge of
            // probability 1.
            p_v[y] = cp;
            d_v[y] = cd_acc;
          } else {
            p_v[y] = qp;
            d_v[y] = qd;
          }
        } else {
          int in_edge = -1;
          for (int e : net.in_edges(v))
            if (y >> pos_in_bag[e] & 1) in_edge = e;
          Num pi = detail::to_num<Num>(net.edge(in_edge).prob);
          Num wt = detail::to_num<Num>(net.edge(in_edge).weight);
          p_v[y] = pi * cp;
          d_v[y] = pi * cd_acc + wt * p_v[y];
        }
      }
    }

    for (int e : bag_v) pos_in_bag[e] = -1;
  }

  tables.apd = tables.d[ext_root][0];
  return tables;
}

// APD(X_N) over a given tree-extension, read from d[root][empty set].
template <class Num = Rational>
Num run_dp(const PhyloNetwork& net, const TreeExtension& ext) {
  return run_dp_tables<Num>(net, ext).apd;
}

}  // namespace apdkit
