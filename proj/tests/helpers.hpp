#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "apdkit/apdkit.hpp"

namespace apdkit::testing {

inline std::string data_path(const std::string& name) {
  return std::string(APDKIT_TEST_DATA) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PhyloNetwork load_fixture(const std::string& name) {
  return parse_json(slurp(data_path(name)));
}

inline TreeExtension load_extension(const std::string& name) {
  return parse_extension_json(slurp(data_path(name)));
}

// Finds the edge tail->head by node names (taxon for leaves, name otherwise).
inline int edge_by_names(const PhyloNetwork& net, const std::string& tail,
                         const std::string& head) {
  auto label = [&](NodeId v) { return net.node(v).taxon + net.node(v).name; };
  for (int e = 0; e < net.num_edges(); ++e)
    if (label(net.edge(e).tail) == tail && label(net.edge(e).head) == head) return e;
  throw std::runtime_error("no edge " + tail + "->" + head);
}

inline NodeId node_by_label(const PhyloNetwork& net, const std::string& name) {
  for (NodeId v = 0; v < net.num_nodes(); ++v)
    if (net.node(v).taxon + net.node(v).name == name) return v;
  throw std::runtime_error("no node " + name);
}

}  // namespace apdkit::testing
