#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace apdkit;
using namespace apdkit::testing;

namespace {

// Diamond with side leaves: rho -> x -> r (0.3), rho -> y -> r (0.7),
// r -> l, x -> lx, y -> ly. Fully reticulation-visible.
PhyloNetwork diamond() {
  PhyloNetwork net;
  NodeId rho = net.add_node({}, "rho");
  NodeId x = net.add_node({}, "x");
  NodeId y = net.add_node({}, "y");
  NodeId r = net.add_node({}, "r");
  NodeId l = net.add_node("l");
  NodeId lx = net.add_node("lx");
  NodeId ly = net.add_node("ly");
  net.add_edge(rho, x, 1);
  net.add_edge(rho, y, 1);
  net.add_edge(x, r, 1, Rational(3, 10));
  net.add_edge(y, r, 1, Rational(7, 10));
  net.add_edge(r, l, 1);
  net.add_edge(x, lx, 1);
  net.add_edge(y, ly, 1);
  net.finalize();
  return net;
}

// rho -> v -> r (0.3), rho -> u -> r (0.7), r -> l, u -> lu; v is invisible
// but the reticulation r is visible, so the closed form still applies.
PhyloNetwork elbow() {
  PhyloNetwork net;
  NodeId rho = net.add_node({}, "rho");
  NodeId v = net.add_node({}, "v");
  NodeId u = net.add_node({}, "u");
  NodeId r = net.add_node({}, "r");
  NodeId l = net.add_node("l");
  NodeId lu = net.add_node("lu");
  net.add_edge(rho, v, 1);
  net.add_edge(rho, u, 1);
  net.add_edge(v, r, 1, Rational(3, 10));
  net.add_edge(u, r, 1, Rational(7, 10));
  net.add_edge(r, l, 1);
  net.add_edge(u, lu, 1);
  net.finalize();
  return net;
}

}  // namespace

TEST_CASE("closed form on visible heads returns the inheritance probability") {
  PhyloNetwork net = diamond();
  REQUIRE(is_reticulation_visible(net));
  CHECK(gamma_rv(net, edge_by_names(net, "x", "r")) == Rational(3, 10));
  CHECK(gamma_rv(net, edge_by_names(net, "y", "r")) == Rational(7, 10));
  CHECK(gamma_rv(net, edge_by_names(net, "r", "l")) == 1);
  CHECK(gamma_rv(net, edge_by_names(net, "x", "lx")) == 1);
}

TEST_CASE("closed form on an invisible tree node") {
  PhyloNetwork net = elbow();
  REQUIRE(is_reticulation_visible(net));
  // v only reaches a leaf when the switching keeps v->r.
  CHECK(gamma_rv(net, edge_by_names(net, "rho", "v")) == Rational(3, 10));
  CHECK(gamma_rv(net, edge_by_names(net, "rho", "u")) == 1);
  CHECK(gamma_rv(net, edge_by_names(net, "rho", "v")) ==
        gamma_bruteforce(net, edge_by_names(net, "rho", "v"), all_taxa(net)));
}

TEST_CASE("closed form requires reticulation visibility") {
  PhyloNetwork net = load_fixture("two_retic.json");
  CHECK_THROWS_AS(apd_rv(net), PreconditionError);
  CHECK_THROWS_AS(gamma_rv(net, 0), PreconditionError);
}

TEST_CASE("three gamma implementations agree edge by edge") {
  std::mt19937_64 rng(2024);
  int edges_checked = 0;
  for (int iter = 0; iter < 25; ++iter) {
    PhyloNetwork net = gen_network(rng, 2 + iter % 4, 1 + iter % 3, /*tree_child=*/true);
    REQUIRE(is_reticulation_visible(net));
    std::vector<Rational> fast = gamma_rv_all(net);
    TaxonSet z = all_taxa(net);
    for (int e = 0; e < net.num_edges(); ++e) {
      INFO("iter " << iter << " edge " << e);
      Rational brute = gamma_bruteforce(net, e, z);
      CHECK(fast[e] == brute);
      CHECK(gamma_rv_reference(net, e) == brute);
      ++edges_checked;
    }
  }
  CHECK(edges_checked >= 200);
}

TEST_CASE("apd_rv equals brute force on reticulation-visible inputs") {
  std::mt19937_64 rng(2025);
  for (int iter = 0; iter < 25; ++iter) {
    PhyloNetwork net = gen_network(rng, 2 + iter % 4, 1 + iter % 3, /*tree_child=*/true);
    INFO("iter " << iter);
    CHECK(apd_rv(net) == apd_bruteforce(net, all_taxa(net)));
  }
  CHECK(apd_rv(diamond()) == apd_bruteforce(diamond(), all_taxa(diamond())));
  PhyloNetwork tree = gen_tree(rng, 5);
  CHECK(apd_rv(tree) == tree.total_edge_weight());
}

TEST_CASE("operation counter grows with the input") {
  RvStats small, large;
  apd_rv(gen_tree_child_chain(50), &small);
  apd_rv(gen_tree_child_chain(500), &large);
  CHECK(small.map_ops > 0);
  CHECK(large.map_ops > 5 * small.map_ops);
}
