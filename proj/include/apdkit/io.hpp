#pragma once

#include <json.hpp>

#include <cctype>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/network.hpp"

namespace apdkit {

struct ParseDiagnostics {
  size_t position = 0;
  std::string message;
  enum class Severity { Error, Warning } severity = Severity::Warning;
};

namespace detail {

// Builder records: node degrees are unknown until hybrid occurrences are
// merged, so the network object is assembled at the end.
struct NetBuilder {
  struct BEdge {
    int tail, head;
    Rational weight = 0;
    std::optional<Rational> prob;
  };
  std::vector<std::string> label;  // becomes taxon for leaves, name otherwise
  std::vector<BEdge> edges;
  std::vector<ParseDiagnostics>* warnings;

  int new_node() {
    label.emplace_back();
    return static_cast<int>(label.size()) - 1;
  }

  void warn(size_t pos, std::string msg) {
    if (warnings) warnings->push_back({pos, std::move(msg), ParseDiagnostics::Severity::Warning});
  }

  PhyloNetwork finish() {
    int n = static_cast<int>(label.size());
    std::vector<int> outdeg(n, 0);
    for (const BEdge& e : edges) ++outdeg[e.tail];

    // Omitted probabilities on reticulation in-edges: one missing edge takes
    // the remainder to 1; several share it equally (with a warning).
    std::vector<std::vector<BEdge*>> in(n);
    for (BEdge& e : edges) in[e.head].push_back(&e);
    for (int v = 0; v < n; ++v) {
      if (in[v].size() < 2) {
        for (BEdge* e : in[v])
          if (!e->prob) e->prob = 1;
        continue;
      }
      Rational given = 0;
      std::vector<BEdge*> missing;
      for (BEdge* e : in[v]) {
        if (e->prob)
          given += *e->prob;
        else
          missing.push_back(e);
      }
      if (missing.empty()) continue;
      Rational remainder = Rational(1) - given;
      if (missing.size() > 1)
        warn(0, std::to_string(missing.size()) + " in-edges of a reticulation lack probabilities; "
                "sharing the remainder " + to_fraction_string(remainder) + " equally");
      for (BEdge* e : missing) e->prob = remainder / static_cast<int>(missing.size());
    }

    PhyloNetwork net;
    for (int v = 0; v < n; ++v) {
      if (outdeg[v] == 0)
        net.add_node(label[v]);
      else
        net.add_node({}, label[v]);
    }
    for (const BEdge& e : edges) net.add_edge(e.tail, e.head, e.weight, e.prob.value_or(1));
    net.finalize();
    return net;
  }
};

class ENewickParser {
 public:
  ENewickParser(std::string_view text, std::vector<ParseDiagnostics>* warnings)
      : text_(text) {
    builder_.warnings = warnings;
  }

  PhyloNetwork run() {
    skip_space();
    parse_node(kNoNode);
    skip_space();
    if (!consume(';')) fail("expected ';'");
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after ';'");
    return builder_.finish();
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  NetBuilder builder_;
  std::unordered_map<std::string, int> hybrid_node_;
  std::unordered_map<std::string, bool> hybrid_has_children_;

  [[noreturn]] void fail(const std::string& msg) {
    throw InputError("eNewick parse error at byte " + std::to_string(pos_) + ": " + msg);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  bool consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void parse_node(int parent) {
    skip_space();
    std::vector<int> child_slots;  // deferred: children parse before the node exists
    bool has_children = consume('(');
    size_t children_pos = pos_;
    struct Pending {
      int edge;  // builder edge index whose tail is fixed later
    };
    std::vector<int> pending_edges;
    if (has_children) {
      // Parse children into a placeholder tail, patched once this node's
      // identity (fresh or merged hybrid) is known.
      do {
        size_t before = builder_.edges.size();
        parse_node(-2);
        for (size_t i = before; i < builder_.edges.size(); ++i)
          if (builder_.edges[i].tail == -2) pending_edges.push_back(static_cast<int>(i));
      } while (consume(','));
      if (!consume(')')) fail("expected ')' or ','");
    }

    // Label and optional #H tag.
    std::string raw;
    while (pos_ < text_.size() && std::string_view("(),:;[").find(text_[pos_]) == std::string_view::npos)
      raw.push_back(text_[pos_++]);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.pop_back();
    std::string name = raw, hybrid;
    if (auto hash = raw.find('#'); hash != std::string::npos) {
      name = raw.substr(0, hash);
      hybrid = raw.substr(hash + 1);
      if (hybrid.empty()) fail("empty hybrid tag");
    }

    int node;
    if (!hybrid.empty()) {
      auto [it, fresh] = hybrid_node_.emplace(hybrid, -1);
      if (fresh) it->second = builder_.new_node();
      node = it->second;
      if (has_children) {
        if (hybrid_has_children_[hybrid])
          fail("hybrid tag #" + hybrid + " given children in more than one occurrence");
        hybrid_has_children_[hybrid] = true;
      }
      if (!name.empty()) {
        if (!builder_.label[node].empty() && builder_.label[node] != name)
          fail("hybrid tag #" + hybrid + " carries conflicting labels '" + builder_.label[node] +
               "' and '" + name + "'");
        builder_.label[node] = name;
      }
    } else {
      node = builder_.new_node();
      builder_.label[node] = name;
    }
    for (int e : pending_edges) builder_.edges[e].tail = node;
    (void)children_pos;
    (void)child_slots;

    // Edge fields :length[:support[:probability]] plus [&k=v,...] comments.
    std::optional<Rational> weight, prob;
    if (consume(':')) {
      weight = parse_number_field("length");
      if (consume(':')) {
        parse_number_field("support");  // parsed and discarded
        if (consume(':')) prob = parse_number_field("probability");
      }
    }
    while (peek() == '[') parse_comment(weight, prob);

    if (parent == kNoNode) {
      if (weight || prob)
        builder_.warn(pos_, "edge annotation on the root has no incoming edge; ignored");
      return;
    }
    NetBuilder::BEdge e;
    e.tail = parent;  // -2 placeholder when called from a child list
    e.head = node;
    e.weight = weight.value_or(0);
    e.prob = prob;
    builder_.edges.push_back(std::move(e));
  }

  std::optional<Rational> parse_number_field(const char* what) {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           std::string_view("(),:;[").find(text_[pos_]) == std::string_view::npos)
      ++pos_;
    std::string_view token = text_.substr(start, pos_ - start);
    size_t trimmed = token.find_last_not_of(" \t\r\n");
    token = trimmed == std::string_view::npos ? std::string_view{} : token.substr(0, trimmed + 1);
    if (token.empty()) return std::nullopt;  // e.g. "::0.3" skips support
    try {
      return parse_rational(token);
    } catch (const InputError& err) {
      pos_ = start;
      fail(std::string("bad ") + what + ": " + err.what());
    }
  }

  void parse_comment(std::optional<Rational>& weight, std::optional<Rational>& prob) {
    size_t start = pos_;
    size_t end = text_.find(']', pos_);
    if (end == std::string_view::npos) fail("unterminated comment");
    std::string_view body = text_.substr(pos_ + 1, end - pos_ - 1);
    pos_ = end + 1;
    if (body.empty() || body.front() != '&') return;  // plain comment, ignored
    body.remove_prefix(1);
    while (!body.empty()) {
      size_t comma = body.find(',');
      std::string_view item = body.substr(0, comma);
      body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
      size_t eq = item.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view key = item.substr(0, eq), value = item.substr(eq + 1);
      try {
        if (key == "prob")
          prob = parse_rational(value);
        else if (key == "weight")
          weight = parse_rational(value);
      } catch (const InputError& err) {
        pos_ = start;
        fail(std::string("bad comment annotation: ") + err.what());
      }
    }
  }
};

// "0.3" when an exact decimal exists, else "p/q" (used in JSON and comments).
inline std::string exact_literal(const Rational& r) {
  std::string dec = to_exact_decimal(r);
  return dec.empty() ? to_fraction_string(r) : dec;
}

}  // namespace detail

inline PhyloNetwork parse_enewick(std::string_view text,
                                  std::vector<ParseDiagnostics>* warnings = nullptr) {
  return detail::ENewickParser(text, warnings).run();
}

// Single-statement eNewick; reticulations appear once in full (first visit in
// DFS order, tagged #H1, #H2, ...) and afterwards as references. Weights and
// probabilities use shortest exact decimals when they exist, else fractions
// in [&weight=p/q] / [&prob=p/q] comments.
inline std::string emit_enewick(const PhyloNetwork& net) {
  std::map<NodeId, int> hybrid_tag;
  int next_tag = 1;
  std::string out;

  auto emit_fields = [&](int e) {
    const Edge& edge = net.edge(e);
    std::string dec = to_exact_decimal(edge.weight);
    out += ":" + (dec.empty() ? "0" : dec);
    std::string annot;
    if (dec.empty()) annot += "weight=" + to_fraction_string(edge.weight);
    if (net.is_reticulation(edge.head)) {
      std::string pdec = to_exact_decimal(edge.prob);
      if (!pdec.empty())
        out += "::" + pdec;
      else
        annot += std::string(annot.empty() ? "" : ",") + "prob=" + to_fraction_string(edge.prob);
    }
    if (!annot.empty()) out += "[&" + annot + "]";
  };

  auto rec = [&](auto&& self, NodeId v) -> void {
    if (net.is_reticulation(v)) {
      auto [it, fresh] = hybrid_tag.emplace(v, next_tag);
      if (!fresh) {
        out += net.node(v).taxon + net.node(v).name + "#H" + std::to_string(it->second);
        return;
      }
      ++next_tag;
    }
    if (!net.is_leaf(v)) {
      out += "(";
      bool first = true;
      for (int e : net.out_edges(v)) {
        if (!first) out += ",";
        first = false;
        self(self, net.edge(e).head);
        emit_fields(e);
      }
      out += ")";
    }
    out += net.node(v).taxon + net.node(v).name;
    if (net.is_reticulation(v)) out += "#H" + std::to_string(hybrid_tag[v]);
  };
  rec(rec, net.root());
  return out + ";";
}

namespace detail {

inline Rational rational_from_json(const nlohmann::json& value, const char* what) {
  try {
    if (value.is_string()) return parse_rational(value.get<std::string>());
    // Numbers go through their shortest textual form so decimals stay exact.
    if (value.is_number()) return parse_rational(value.dump());
  } catch (const InputError& err) {
    throw InputError(std::string("bad ") + what + ": " + err.what());
  }
  throw InputError(std::string(what) + " must be a number or a numeric string");
}

inline nlohmann::json rational_to_json(const Rational& r) {
  if (denominator(r) == 1 && numerator(r) >= std::numeric_limits<long long>::min() &&
      numerator(r) <= std::numeric_limits<long long>::max())
    return numerator(r).convert_to<long long>();
  return exact_literal(r);
}

}  // namespace detail

// {"nodes":[{"id":..,"taxon":..,"name":..}],"edges":[{"tail":..,"head":..,
//  "weight":..,"prob":..}]}; ids are arbitrary integers, weights and probs
// numbers or exact numeric strings ("3/10", "0.3").
inline PhyloNetwork parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
      throw InputError("JSON network needs 'nodes' and 'edges' arrays");
    PhyloNetwork net;
    std::unordered_map<long long, NodeId> id_map;
    for (const auto& jn : doc.at("nodes")) {
      long long id = jn.at("id").get<long long>();
      if (!id_map.emplace(id, net.num_nodes()).second)
        throw InputError("duplicate node id " + std::to_string(id));
      net.add_node(jn.value("taxon", std::string{}), jn.value("name", std::string{}));
    }
    for (const auto& je : doc.at("edges")) {
      long long tail = je.at("tail").get<long long>(), head = je.at("head").get<long long>();
      auto t = id_map.find(tail), h = id_map.find(head);
      if (t == id_map.end() || h == id_map.end())
        throw InputError("edge references unknown node id " +
                         std::to_string(t == id_map.end() ? tail : head));
      Rational weight = je.contains("weight") ? detail::rational_from_json(je.at("weight"), "weight")
                                              : Rational(0);
      Rational prob =
          je.contains("prob") ? detail::rational_from_json(je.at("prob"), "prob") : Rational(1);
      net.add_edge(t->second, h->second, std::move(weight), std::move(prob));
    }
    net.finalize();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed network JSON: ") + e.what());
  }
}

inline std::string emit_json(const PhyloNetwork& net, int indent = -1) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  doc["edges"] = nlohmann::json::array();
  for (NodeId v = 0; v < net.num_nodes(); ++v) {
    nlohmann::json jn{{"id", v}};
    if (!net.node(v).taxon.empty()) jn["taxon"] = net.node(v).taxon;
    if (!net.node(v).name.empty()) jn["name"] = net.node(v).name;
    doc["nodes"].push_back(std::move(jn));
  }
  for (int e = 0; e < net.num_edges(); ++e) {
    nlohmann::json je{{"tail", net.edge(e).tail},
                      {"head", net.edge(e).head},
                      {"weight", detail::rational_to_json(net.edge(e).weight)}};
    if (net.edge(e).prob != 1) je["prob"] = detail::rational_to_json(net.edge(e).prob);
    doc["edges"].push_back(std::move(je));
  }
  return doc.dump(indent);
}

// Tree-extensions serialize as a parent array (-1 marks the root).
inline std::string emit_extension_json(const TreeExtension& ext, int indent = -1) {
  nlohmann::json doc;
  doc["parent"] = ext.parent;
  return doc.dump(indent);
}

inline TreeExtension parse_extension_json(std::string_view text) {
  try {
    nlohmann::json doc = nlohmann::json::parse(text);
    TreeExtension ext;
    ext.parent = doc.at("parent").get<std::vector<NodeId>>();
    return ext;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed extension JSON: ") + e.what());
  }
}

// Order-independent structural signature of a labeled weighted DAG; equal
// signatures certify isomorphism for round-trip tests.
inline std::string canonical_signature(const PhyloNetwork& net) {
  std::vector<std::string> memo(net.num_nodes());
  auto rec = [&](auto&& self, NodeId v) -> const std::string& {
    if (!memo[v].empty()) return memo[v];
    std::vector<std::string> parts;
    for (int e : net.out_edges(v))
      parts.push_back("(" + to_fraction_string(net.edge(e).weight) + "|" +
                      to_fraction_string(net.edge(e).prob) + "|" +
                      self(self, net.edge(e).head) + ")");
    std::sort(parts.begin(), parts.end());
    std::string sig = "[" + net.node(v).taxon + ":";
    for (const auto& p : parts) sig += p;
    sig += "]";
    memo[v] = std::move(sig);
    return memo[v];
  };
  return rec(rec, net.root());
}

}  // namespace apdkit
