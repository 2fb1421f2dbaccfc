#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace apdkit;
using namespace apdkit::testing;

namespace {

struct OracleTables {
  std::vector<std::vector<Rational>> p, d;
};

// Reference semantics by full enumeration: p[v][Y] sums P(sigma) over the
// (v,Y)-compatible switchings; d[v][Y] additionally weighs each switching by
// the total weight of its edges lying on a sigma-path from a GW(v) edge to a
// leaf. The root has an empty bag and scores the full PD.
OracleTables oracle_tables(const PhyloNetwork& net, const TreeExtension& ext) {
  auto bag = bags(net, ext);
  NodeId root = ext.root();
  OracleTables t;
  t.p.resize(net.num_nodes());
  t.d.resize(net.num_nodes());
  for (NodeId v = 0; v < net.num_nodes(); ++v) {
    t.p[v].assign(std::uint64_t{1} << bag[v].size(), 0);
    t.d[v].assign(std::uint64_t{1} << bag[v].size(), 0);
  }

  TaxonSet z = all_taxa(net);
  enumerate_switchings(net, net.reticulations(), [&](const SwitchingMask& mask) {
    Rational prob = switching_probability(net, mask);
    std::vector<char> reach = edge_reaches(net, mask, z);
    for (NodeId v = 0; v < net.num_nodes(); ++v) {
      std::uint64_t y = 0;
      for (size_t i = 0; i < bag[v].size(); ++i)
        if (reach[bag[v][i]]) y |= std::uint64_t{1} << i;

      Rational score = 0;
      if (v == root) {
        for (int e = 0; e < net.num_edges(); ++e)
          if (reach[e]) score += net.edge(e).weight;
      } else {
        std::vector<char> below(net.num_nodes(), 0);
        std::vector<NodeId> stack;
        std::vector<char> in_y(net.num_edges(), 0);
        for (size_t i = 0; i < bag[v].size(); ++i)
          if (y >> i & 1) {
            in_y[bag[v][i]] = 1;
            NodeId h = net.edge(bag[v][i]).head;
            if (!below[h]) {
              below[h] = 1;
              stack.push_back(h);
            }
          }
        while (!stack.empty()) {
          NodeId u = stack.back();
          stack.pop_back();
          for (int e : net.out_edges(u))
            if (mask.keeps_edge(net, e) && !below[net.edge(e).head]) {
              below[net.edge(e).head] = 1;
              stack.push_back(net.edge(e).head);
            }
        }
        for (int e = 0; e < net.num_edges(); ++e)
          if (reach[e] && (in_y[e] || below[net.edge(e).tail])) score += net.edge(e).weight;
      }
      t.p[v][y] += prob;
      t.d[v][y] += prob * score;
    }
  });
  return t;
}

}  // namespace

TEST_CASE("fixture DP: value and golden table entries") {
  PhyloNetwork net = load_fixture("two_retic.json");
  TreeExtension ext = load_extension("two_retic.extension.json");
  DpTables<Rational> tables = run_dp_tables<Rational>(net, ext);
  CHECK(tables.apd == Rational(271, 10));
  CHECK(run_dp<Rational>(net, ext) == Rational(271, 10));

  // Leaf a: in-edge p->a with weight 1 and probability 1.
  NodeId a = net.node_by_taxon("a");
  REQUIRE(tables.bag[a] == std::vector<int>{edge_by_names(net, "p", "a")});
  CHECK(tables.p[a][0] == 0);
  CHECK(tables.d[a][0] == 0);
  CHECK(tables.p[a][1] == 1);
  CHECK(tables.d[a][1] == 1);

  // Internal node w (children d, e in the extension; bag {vw}):
  // every switching reaches d and e through w, collecting 1 + 1 + 2.
  NodeId w = node_by_label(net, "w");
  REQUIRE(tables.bag[w] == std::vector<int>{edge_by_names(net, "v", "w")});
  CHECK(tables.p[w][1] == 1);
  CHECK(tables.d[w][1] == 4);
}

TEST_CASE("fixture DP on the induced subnetwork") {
  PhyloNetwork net = load_fixture("two_retic.json");
  PhyloNetwork sub = induce(net, taxa_by_name(net, {"a", "c", "e"})).net;
  TreeExtension ext = scanwidth_heuristic(sub).extension;
  CHECK(run_dp<Rational>(sub, ext) == Rational(47, 2));
}

TEST_CASE("any tree with itself as extension gives Faith PD") {
  std::mt19937_64 rng(808);
  for (int i = 0; i < 10; ++i) {
    PhyloNetwork tree = gen_tree(rng, 2 + i % 5);
    TreeExtension ext;
    ext.parent.assign(tree.num_nodes(), kNoNode);
    for (int e = 0; e < tree.num_edges(); ++e)
      ext.parent[tree.edge(e).head] = tree.edge(e).tail;
    CHECK(run_dp<Rational>(tree, ext) == tree.total_edge_weight());
  }
}

TEST_CASE("table semantics match the enumeration oracle") {
  PhyloNetwork fixture = load_fixture("two_retic.json");
  TreeExtension fixture_ext = load_extension("two_retic.extension.json");
  std::mt19937_64 rng(909);

  for (int iter = 0; iter < 12; ++iter) {
    PhyloNetwork net = iter == 0 ? fixture : gen_network(rng, 2 + iter % 3, iter % 4);
    TreeExtension ext = iter == 0 ? fixture_ext : scanwidth_heuristic(net).extension;
    DpTables<Rational> tables = run_dp_tables<Rational>(net, ext);
    OracleTables oracle = oracle_tables(net, ext);
    for (NodeId v = 0; v < net.num_nodes(); ++v) {
      REQUIRE(tables.p[v].size() == oracle.p[v].size());
      Rational mass = 0;
      for (size_t y = 0; y < tables.p[v].size(); ++y) {
        INFO("iter " << iter << " node " << v << " Y=" << y);
        CHECK(tables.p[v][y] == oracle.p[v][y]);
        CHECK(tables.d[v][y] == oracle.d[v][y]);
        if (tables.p[v][y] == 0) CHECK(tables.d[v][y] == 0);
        mass += tables.p[v][y];
      }
      CHECK(mass == 1);  // per-node normalization
    }
    CHECK(tables.apd == apd_bruteforce(net, all_taxa(net)));
  }
}

TEST_CASE("compatibility predicate agrees with the reach-derived mask") {
  PhyloNetwork net = load_fixture("two_retic.json");
  TreeExtension ext = load_extension("two_retic.extension.json");
  auto bag = bags(net, ext);
  for (const auto& mask : all_switchings(net, net.reticulations())) {
    std::vector<char> reach = edge_reaches(net, mask, all_taxa(net));
    for (NodeId v = 0; v < net.num_nodes(); ++v) {
      for (std::uint64_t y = 0; y < (std::uint64_t{1} << bag[v].size()); ++y) {
        std::vector<int> selected;
        bool expect = true;
        for (size_t i = 0; i < bag[v].size(); ++i) {
          if (y >> i & 1) selected.push_back(bag[v][i]);
          if (static_cast<bool>(reach[bag[v][i]]) != static_cast<bool>(y >> i & 1))
            expect = false;
        }
        CHECK(is_compatible(net, mask, v, ext, selected) == expect);
      }
    }
  }
}

TEST_CASE("cross-engine equality over heuristic extensions") {
  std::mt19937_64 rng(1010);
  for (int iter = 0; iter < 30; ++iter) {
    PhyloNetwork net = gen_network(rng, 2 + iter % 4, iter % 5);
    TreeExtension ext = scanwidth_heuristic(net).extension;
    INFO("iter " << iter);
    CHECK(run_dp<Rational>(net, ext) == apd_bruteforce(net, all_taxa(net)));
  }
}

TEST_CASE("float mode tracks the exact value") {
  PhyloNetwork net = load_fixture("two_retic.json");
  TreeExtension ext = load_extension("two_retic.extension.json");
  double approx = run_dp<double>(net, ext);
  CHECK(std::abs(approx - 27.1) <= 1e-9 * 27.1);
}

TEST_CASE("DP rejects an invalid extension") {
  PhyloNetwork net = load_fixture("two_retic.json");
  TreeExtension bad = load_extension("two_retic.extension.json");
  bad.parent[node_by_label(net, "r")] = net.root();
  CHECK_THROWS_AS(run_dp<Rational>(net, bad), PreconditionError);
}
