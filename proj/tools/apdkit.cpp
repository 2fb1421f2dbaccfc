// apdkit: average-tree phylogenetic diversity on rooted networks.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "apdkit/apdkit.hpp"

namespace {

using namespace apdkit;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

PhyloNetwork load_network(const std::string& path) {
  std::string text = read_file(path);
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw InputError("'" + path + "' is empty");
  if (text[first] == '{') return parse_json(text);
  return parse_enewick(text);
}

std::uint64_t switching_cap_from_env() {
  if (const char* env = std::getenv("APDKIT_SWITCHING_CAP")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError("APDKIT_SWITCHING_CAP is not a number");
    }
  }
  return kDefaultSwitchingCap;
}

TaxonSet taxa_from_flag(const PhyloNetwork& net, const std::string& csv) {
  if (csv.empty()) return all_taxa(net);
  std::vector<std::string> names;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) names.push_back(item);
  return taxa_by_name(net, names);
}

NodeId resolve_node(const PhyloNetwork& net, const std::string& token) {
  if (!token.empty() && token.find_first_not_of("0123456789") == std::string::npos) {
    NodeId v = std::stoi(token);
    if (v < net.num_nodes()) return v;
    throw InputError("node id " + token + " out of range");
  }
  if (net.has_taxon(token)) return net.node_by_taxon(token);
  for (NodeId v = 0; v < net.num_nodes(); ++v)
    if (net.node(v).name == token) return v;
  throw InputError("no node named '" + token + "'");
}

void print_value(const Rational& value, bool as_json, json extra = json::object()) {
  if (as_json) {
    extra["value"] = to_fraction_string(value);
    extra["decimal"] = to_decimal_string(value);
    std::cout << extra.dump(2) << "\n";
  } else {
    std::cout << to_fraction_string(value) << "\n" << to_decimal_string(value) << "\n";
    for (auto& [k, v] : extra.items())
      std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
}

int cmd_validate(const std::string& file, bool as_json) {
  PhyloNetwork net = load_network(file);
  ValidationReport report = validate(net);
  if (as_json) {
    json doc;
    doc["valid"] = report.valid();
    doc["issues"] = json::array();
    for (const auto& issue : report.issues)
      doc["issues"].push_back({{"severity", issue.severity == ValidationIssue::Severity::Error ? "error" : "warning"},
                               {"message", issue.message}});
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const auto& issue : report.issues)
      std::cout << (issue.severity == ValidationIssue::Severity::Error ? "error: " : "warning: ") << issue.message
                << "\n";
    std::cout << (report.valid() ? "valid" : "invalid") << "\n";
  }
  return report.valid() ? 0 : 2;
}

int cmd_apd(const std::string& file, const std::string& taxa_csv, const std::string& engine_name_,
            const std::string& extension_file, bool float_mode, bool as_json) {
  PhyloNetwork net = load_network(file);
  ValidationReport report = validate(net);
  if (!report.valid()) throw InputError("invalid network: " + report.issues.front().message);

  Engine engine = engine_from_name(engine_name_);
  ApdOptions opts;
  opts.switching_cap = switching_cap_from_env();
  if (!extension_file.empty()) {
    opts.extension = parse_extension_json(read_file(extension_file));
    if (engine == Engine::Auto) engine = Engine::SwDp;
  }
  TaxonSet z = taxa_from_flag(net, taxa_csv);
  if (opts.extension && z.size() != net.leaves().size())
    throw InputError("--extension applies to the full taxon set; drop --taxa");

  auto t0 = std::chrono::steady_clock::now();
  ApdAnswer ans;
  if (float_mode && (engine == Engine::SwDp || (engine == Engine::Auto && opts.extension))) {
    TreeExtension ext = opts.extension ? *opts.extension : scanwidth_heuristic(net).extension;
    double value = run_dp<double>(net, ext);
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
    json extra{{"engine", "swdp"}, {"mode", "float"}, {"ms", ms.count()}};
    if (as_json) {
      extra["value"] = value;
      std::cout << extra.dump(2) << "\n";
    } else {
      std::cout << value << "\nengine: swdp (float)\n";
    }
    return 0;
  }
  ans = apd_engine_subset(net, z, engine, opts);
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
  json extra{{"engine", engine_name(ans.used)}, {"ms", ms.count()}};
  if (float_mode) extra["float"] = static_cast<double>(ans.value.convert_to<double>());
  print_value(ans.value, as_json, extra);
  return 0;
}

int cmd_gamma(const std::string& file, const std::string& edge_spec, const std::string& taxa_csv,
              bool as_json) {
  PhyloNetwork net = load_network(file);
  ValidationReport report = validate(net);
  if (!report.valid()) throw InputError("invalid network: " + report.issues.front().message);

  size_t comma = edge_spec.find(',');
  if (comma == std::string::npos) throw InputError("--edge expects 'tail,head'");
  NodeId u = resolve_node(net, edge_spec.substr(0, comma));
  NodeId v = resolve_node(net, edge_spec.substr(comma + 1));
  int edge = -1;
  for (int e : net.out_edges(u))
    if (net.edge(e).head == v) edge = e;
  if (edge < 0) throw InputError("no edge " + edge_spec);

  TaxonSet z = taxa_from_flag(net, taxa_csv);
  Rational value;
  if (z.size() == net.leaves().size() && invisible_reticulations(net).empty())
    value = gamma_rv(net, edge);
  else
    value = gamma_bruteforce(net, edge, z, switching_cap_from_env());
  print_value(value, as_json);
  return 0;
}

int cmd_scanwidth(const std::string& file, bool exact, const std::string& emit_file, bool as_json) {
  PhyloNetwork net = load_network(file);
  ValidationReport report = validate(net);
  if (!report.valid()) throw InputError("invalid network: " + report.issues.front().message);
  ScanwidthResult result = exact ? scanwidth_exact(net, 24) : scanwidth_heuristic(net);
  if (!emit_file.empty()) write_file(emit_file, emit_extension_json(result.extension, 2) + "\n");
  if (as_json) {
    json doc{{"width", result.width}, {"exact", exact}, {"parent", result.extension.parent}};
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << result.width << "\n";
  }
  return 0;
}

int cmd_maximize(const std::string& file, int k, bool greedy, const std::string& engine_name_,
                 bool as_json) {
  PhyloNetwork net = load_network(file);
  ValidationReport report = validate(net);
  if (!report.valid()) throw InputError("invalid network: " + report.issues.front().message);
  Engine engine = engine_from_name(engine_name_);
  ApdOptions opts;
  opts.switching_cap = switching_cap_from_env();
  ApdEngineFn apd = [&](const PhyloNetwork& sub) { return apd_engine(sub, engine, opts).value; };
  MaxApdResult result = greedy ? max_apd_greedy(net, k, apd) : max_apd_exact(net, k, apd);
  json extra{{"taxa", result.taxa}, {"method", greedy ? "greedy" : "exact"}};
  print_value(result.value, as_json, extra);
  return 0;
}

int cmd_gen(const std::string& kind, int leaves, int retics, int k, const std::string& d_text,
            std::uint64_t seed, const std::string& out_prefix, bool as_json) {
  std::mt19937_64 rng(seed);
  PhyloNetwork net;
  json meta{{"kind", kind}, {"seed", seed}};
  if (kind == "tree") {
    net = gen_tree(rng, leaves);
  } else if (kind == "level1") {
    net = gen_level1(rng, leaves, retics);
  } else if (kind == "random") {
    net = gen_network(rng, leaves, retics);
  } else if (kind == "nap-reduction") {
    NapInstance nap;
    nap.tree = gen_tree(rng, leaves);
    for (NodeId v : nap.tree.leaves())
      nap.survival[nap.tree.node(v).taxon] = detail::random_tenth(rng);
    nap.k = k;
    nap.d = parse_rational(d_text);
    MaxApdInstance inst = construct_hardness_instance(nap);
    net = inst.net;
    meta["k_prime"] = inst.k_prime;
    meta["d_prime"] = to_fraction_string(inst.d_prime);
    meta["m"] = to_fraction_string(inst.m);
    meta["source"] = {{"leaves", leaves},
                      {"k", nap.k},
                      {"d", to_fraction_string(nap.d)},
                      {"tree", emit_enewick(nap.tree)}};
    json survival = json::object();
    for (const auto& [taxon, p] : nap.survival) survival[taxon] = to_fraction_string(p);
    meta["source"]["survival"] = survival;
    write_file(out_prefix + ".extension.json", emit_extension_json(inst.extension, 2) + "\n");
  } else {
    throw InputError("unknown generator '" + kind + "'");
  }
  write_file(out_prefix + ".json", emit_json(net, 2) + "\n");
  write_file(out_prefix + ".nwk", emit_enewick(net) + "\n");
  if (kind == "nap-reduction") write_file(out_prefix + ".meta.json", meta.dump(2) + "\n");
  if (as_json)
    std::cout << meta.dump(2) << "\n";
  else
    std::cout << "wrote " << out_prefix << ".json and " << out_prefix << ".nwk\n";
  return 0;
}

int cmd_selftest(int n_random, int max_retics, bool as_json) {
  std::mt19937_64 rng(20250823);
  std::uint64_t cap = switching_cap_from_env();
  int checked = 0, rv_checked = 0;
  for (int i = 0; i < n_random; ++i) {
    int leaves = std::uniform_int_distribution<int>(2, 4)(rng);
    int budget = (14 - (2 * leaves - 1)) / 2;
    int retics = std::uniform_int_distribution<int>(0, std::min(max_retics, budget))(rng);
    bool tree_child = i % 3 == 0;
    PhyloNetwork net = gen_network(rng, leaves, retics, tree_child);
    if (!validate(net).valid()) {
      std::cerr << "selftest: generated invalid network at iteration " << i << "\n";
      return 1;
    }
    Rational brute = apd_bruteforce(net, all_taxa(net), cap);
    Rational dp = run_dp<Rational>(net, scanwidth_heuristic(net).extension);
    Rational dec = apd_decomposed(net, cap);
    bool ok = brute == dp && brute == dec;
    if (ok && invisible_reticulations(net).empty()) {
      ok = apd_rv(net) == brute;
      ++rv_checked;
    }
    if (!ok) {
      std::cerr << "selftest: engine disagreement at iteration " << i << "\n"
                << emit_json(net) << "\n";
      return 1;
    }
    ++checked;
  }
  if (as_json)
    std::cout << json{{"checked", checked}, {"rv_checked", rv_checked}}.dump(2) << "\n";
  else
    std::cout << "all engines agree on " << checked << " networks (" << rv_checked
              << " reticulation-visible)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"average-tree phylogenetic diversity toolkit"};
  app.require_subcommand(1);
  bool as_json = false;
  int threads = 1;
  app.add_flag("--json", as_json, "machine-readable output");
  app.add_option("--threads", threads, "worker threads (engines are currently sequential)");

  std::string file, taxa_csv, engine = "auto", extension_file, edge_spec, emit_file;
  bool float_mode = false, exact_sw = false, heuristic_sw = false, greedy = false;
  int k = 0, leaves = 5, retics = 2, nap_k = 1, n_random = 500, max_retics = 5;
  std::string d_text = "2", out_prefix = "instance", gen_kind;
  std::uint64_t seed = 1;

  auto* v = app.add_subcommand("validate", "check a network file");
  v->add_option("file", file)->required();

  auto* a = app.add_subcommand("apd", "average-tree phylogenetic diversity");
  a->add_option("file", file)->required();
  a->add_option("--taxa", taxa_csv, "comma-separated taxa (default: all)");
  a->add_option("--engine", engine, "auto|brute|swdp|rv|decomp");
  a->add_option("--extension", extension_file, "tree-extension JSON for the DP engine");
  a->add_flag("--float", float_mode, "double-precision DP");

  auto* g = app.add_subcommand("gamma", "per-edge path probability");
  g->add_option("file", file)->required();
  g->add_option("--edge", edge_spec, "tail,head (ids or names)")->required();
  g->add_option("--taxa", taxa_csv);

  auto* s = app.add_subcommand("scanwidth", "width of the best (found) tree-extension");
  s->add_option("file", file)->required();
  s->add_flag("--exact", exact_sw);
  s->add_flag("--heuristic", heuristic_sw);
  s->add_option("--emit-extension", emit_file);

  auto* m = app.add_subcommand("maximize", "best taxon subset of size <= k");
  m->add_option("file", file)->required();
  m->add_option("-k", k)->required();
  m->add_flag("--greedy", greedy);
  m->add_flag("--exact", [](std::int64_t) {}, "exhaustive search (default)");
  m->add_option("--engine", engine);

  auto* ge = app.add_subcommand("gen", "generate instances");
  ge->add_option("kind", gen_kind, "tree|level1|random|nap-reduction")->required();
  ge->add_option("--leaves", leaves);
  ge->add_option("--retics", retics);
  ge->add_option("-k", nap_k, "budget of the source instance (nap-reduction)");
  ge->add_option("-d", d_text, "target diversity of the source instance");
  ge->add_option("--seed", seed);
  ge->add_option("--out", out_prefix);

  auto* st = app.add_subcommand("selftest", "cross-engine equivalence sweep");
  st->add_option("--n-random", n_random);
  st->add_option("--max-retics", max_retics);

  try {
    app.parse(argc, argv);
    if (v->parsed()) return cmd_validate(file, as_json);
    if (a->parsed()) return cmd_apd(file, taxa_csv, engine, extension_file, float_mode, as_json);
    if (g->parsed()) return cmd_gamma(file, edge_spec, taxa_csv, as_json);
    if (s->parsed()) return cmd_scanwidth(file, exact_sw && !heuristic_sw, emit_file, as_json);
    if (m->parsed()) return cmd_maximize(file, k, greedy, engine, as_json);
    if (ge->parsed()) return cmd_gen(gen_kind, leaves, retics, nap_k, d_text, seed, out_prefix, as_json);
    if (st->parsed()) return cmd_selftest(n_random, max_retics, as_json);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const apdkit::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const apdkit::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 3;
  } catch (const apdkit::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
