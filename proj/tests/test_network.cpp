#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace apdkit;
using namespace apdkit::testing;

namespace {

PhyloNetwork make(const std::vector<std::tuple<int, int, int>>& edges, int n_nodes,
                  const std::map<NodeId, std::string>& taxa = {}) {
  PhyloNetwork net;
  for (NodeId v = 0; v < n_nodes; ++v) {
    auto it = taxa.find(v);
    net.add_node(it == taxa.end() ? std::string{} : it->second);
  }
  for (auto [t, h, w] : edges) net.add_edge(t, h, w);
  net.finalize();
  return net;
}

}  // namespace

TEST_CASE("fixture network validates cleanly") {
  PhyloNetwork net = load_fixture("two_retic.json");
  ValidationReport report = validate(net);
  for (const auto& issue : report.issues) INFO(issue.message);
  CHECK(report.valid());
  CHECK(net.num_nodes() == 13);
  CHECK(net.num_edges() == 14);
  CHECK(net.reticulations() == std::vector<NodeId>{5, 6});
  CHECK(net.root() == 0);
  CHECK(net.leaves().size() == 5);
}

TEST_CASE("validate flags structural violations") {
  SECTION("two roots") {
    PhyloNetwork net = make({{0, 2, 1}, {1, 2, 1}, {2, 3, 1}}, 4, {{3, "a"}});
    net.set_prob(0, Rational(1, 2));
    net.set_prob(1, Rational(1, 2));
    CHECK_FALSE(validate(net).valid());
  }
  SECTION("directed cycle") {
    PhyloNetwork net = make({{0, 1, 1}, {1, 2, 1}, {2, 1, 1}, {2, 3, 1}}, 4, {{3, "a"}});
    net.set_prob(0, Rational(1, 2));
    net.set_prob(2, Rational(1, 2));
    CHECK_FALSE(validate(net).valid());
  }
  SECTION("reticulation with out-degree two") {
    PhyloNetwork net = make({{0, 1, 1}, {0, 2, 1}, {1, 3, 1}, {2, 3, 1},
                             {3, 4, 1}, {3, 5, 1}, {1, 6, 1}, {2, 7, 1}},
                            8, {{4, "a"}, {5, "b"}, {6, "c"}, {7, "d"}});
    net.set_prob(2, Rational(1, 2));
    net.set_prob(3, Rational(1, 2));
    CHECK_FALSE(validate(net).valid());
  }
  SECTION("in-probabilities must sum to one") {
    PhyloNetwork net = make({{0, 1, 1}, {0, 2, 1}, {1, 3, 1}, {2, 3, 1},
                             {3, 4, 1}, {1, 5, 1}, {2, 6, 1}},
                            7, {{4, "a"}, {5, "b"}, {6, "c"}});
    net.set_prob(2, Rational(3, 10));
    net.set_prob(3, Rational(3, 10));
    CHECK_FALSE(validate(net).valid());
    net.set_prob(3, Rational(7, 10));
    CHECK(validate(net).valid());
  }
  SECTION("unlabeled leaf and labeled internal node") {
    PhyloNetwork net = make({{0, 1, 1}}, 2);
    CHECK_FALSE(validate(net).valid());
    PhyloNetwork net2 = make({{0, 1, 1}}, 2, {{0, "x"}, {1, "a"}});
    CHECK_FALSE(validate(net2).valid());
  }
  SECTION("duplicate taxon") {
    PhyloNetwork net = make({{0, 1, 1}, {0, 2, 1}}, 3, {{1, "a"}, {2, "a"}});
    CHECK_FALSE(validate(net).valid());
  }
  SECTION("negative weight") {
    PhyloNetwork net = make({{0, 1, -1}}, 2, {{1, "a"}});
    CHECK_FALSE(validate(net).valid());
  }
  SECTION("probability outside (0,1]") {
    PhyloNetwork net = make({{0, 1, 1}}, 2, {{1, "a"}});
    net.set_prob(0, Rational(0));
    CHECK_FALSE(validate(net).valid());
  }
}

TEST_CASE("offspring and descendants") {
  PhyloNetwork net = load_fixture("two_retic.json");
  NodeId u = node_by_label(net, "u");
  TaxonSet off = offspring(net, u);
  TaxonSet expected = taxa_by_name(net, {"a", "b", "c"});
  CHECK(off == expected);

  std::vector<char> below = descendants(net, u);
  int count = 0;
  for (char c : below) count += c;
  CHECK(count == 8);  // u, p, q, r, s, a, b, c
  CHECK(below[u]);
  CHECK_FALSE(below[net.root()]);
}

TEST_CASE("visibility: dominator pass matches the deletion oracle") {
  PhyloNetwork net = load_fixture("two_retic.json");
  std::vector<char> fast = visible_nodes(net);
  for (NodeId v = 0; v < net.num_nodes(); ++v)
    CHECK(static_cast<bool>(fast[v]) == is_visible(net, v));
  CHECK(invisible_reticulations(net) == std::vector<NodeId>{node_by_label(net, "r")});
  CHECK(fast[node_by_label(net, "s")]);  // s dominates leaf c
  CHECK_FALSE(is_reticulation_visible(net));

  std::mt19937_64 rng(20240817);
  for (int i = 0; i < 60; ++i) {
    PhyloNetwork rnd = gen_network(rng, 2 + i % 3, 1 + i % 4);
    std::vector<char> vis = visible_nodes(rnd);
    for (NodeId v = 0; v < rnd.num_nodes(); ++v) {
      INFO("iteration " << i << " node " << v);
      CHECK(static_cast<bool>(vis[v]) == is_visible(rnd, v));
    }
  }
}

TEST_CASE("tree-child generated networks are reticulation-visible") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 25; ++i) {
    PhyloNetwork net = gen_network(rng, 3, 2, /*tree_child=*/true);
    CHECK(validate(net).valid());
    CHECK(is_reticulation_visible(net));
  }
}

TEST_CASE("induce keeps only nodes with offspring in Z") {
  PhyloNetwork net = load_fixture("two_retic.json");
  InducedNetwork ind = induce(net, taxa_by_name(net, {"a", "c", "e"}));
  CHECK(validate(ind.net).valid());
  CHECK(ind.net.leaves().size() == 3);
  // Exactly the leaves b and d disappear; every internal node still reaches
  // one of a, c, e (q via s, w via e).
  CHECK(ind.net.num_nodes() == 11);
  for (NodeId v = 0; v < ind.net.num_nodes(); ++v) {
    CHECK(net.node(ind.node_map[v]).taxon != "b");
    CHECK(net.node(ind.node_map[v]).taxon != "d");
  }
  CHECK_THROWS_AS(induce(net, {}), InputError);
  CHECK_THROWS_AS(induce(net, {node_by_label(net, "u")}), InputError);
}

TEST_CASE("biconnected components and level") {
  PhyloNetwork net = load_fixture("two_retic.json");
  auto comps = biconnected_components(net);
  int nontrivial = 0;
  for (const auto& c : comps)
    if (!c.trivial()) {
      ++nontrivial;
      CHECK(c.root == net.root());  // the single blob spans both reticulations
      CHECK(c.nodes.size() == 7);   // rho, u, v, p, q, r, s
    }
  CHECK(nontrivial == 1);
  CHECK(level(net) == 2);

  // Component edge lists partition the edge set.
  std::vector<int> seen(net.num_edges(), 0);
  for (const auto& c : comps)
    for (int e : c.edges) ++seen[e];
  for (int e = 0; e < net.num_edges(); ++e) CHECK(seen[e] == 1);

  std::mt19937_64 rng(99);
  PhyloNetwork tree = gen_tree(rng, 6);
  CHECK(level(tree) == 0);
  for (int i = 0; i < 10; ++i) {
    PhyloNetwork l1 = gen_level1(rng, 4, 2);
    CHECK(validate(l1).valid());
    CHECK(level(l1) <= 1);
  }
}

TEST_CASE("components come lowest-first") {
  PhyloNetwork net = load_fixture("two_retic.json");
  auto comps = biconnected_components(net);
  auto topo = *net.topological_order();
  std::vector<int> pos(net.num_nodes());
  for (int i = 0; i < net.num_nodes(); ++i) pos[topo[i]] = i;
  for (size_t i = 1; i < comps.size(); ++i)
    CHECK(pos[comps[i - 1].root] >= pos[comps[i].root]);
}
