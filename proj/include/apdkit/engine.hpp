#pragma once

#include <optional>
#include <string>

#include "apdkit/decomp.hpp"
#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/network.hpp"
#include "apdkit/rv.hpp"
#include "apdkit/sw_dp.hpp"
#include "apdkit/switching.hpp"

namespace apdkit {

enum class Engine { Auto, Brute, SwDp, Rv, Decomp };

inline const char* engine_name(Engine e) {
  switch (e) {
    case Engine::Auto: return "auto";
    case Engine::Brute: return "brute";
    case Engine::SwDp: return "swdp";
    case Engine::Rv: return "rv";
    case Engine::Decomp: return "decomp";
  }
  return "?";
}

inline Engine engine_from_name(const std::string& name) {
  for (Engine e : {Engine::Auto, Engine::Brute, Engine::SwDp, Engine::Rv, Engine::Decomp})
    if (name == engine_name(e)) return e;
  throw InputError("unknown engine '" + name + "'");
}

struct ApdOptions {
  std::uint64_t switching_cap = kDefaultSwitchingCap;
  std::optional<TreeExtension> extension;  // used by the DP engine
};

struct ApdAnswer {
  Rational value;
  Engine used = Engine::Auto;
};

// Auto policy: reticulation-visible networks (trees included) go to the
// linear engine; otherwise the blob decomposition when the partial-switching
// product over invisible reticulations is small; otherwise the scanwidth DP
// on a heuristic extension.
inline constexpr std::uint64_t kAutoDecompThreshold = 4096;

inline ApdAnswer apd_engine(const PhyloNetwork& net, Engine engine, const ApdOptions& opts = {}) {
  ApdAnswer ans;
  ans.used = engine;
  if (engine == Engine::Auto) {
    std::vector<NodeId> invisible = invisible_reticulations(net);
    if (invisible.empty()) {
      ans.used = Engine::Rv;
    } else {
      std::uint64_t product = 1;
      bool small = true;
      for (NodeId r : invisible) {
        product *= static_cast<std::uint64_t>(net.in_degree(r));
        if (product > kAutoDecompThreshold) {
          small = false;
          break;
        }
      }
      ans.used = small ? Engine::Decomp : Engine::SwDp;
    }
  }
  switch (ans.used) {
    case Engine::Brute:
      ans.value = apd_bruteforce(net, all_taxa(net), opts.switching_cap);
      break;
    case Engine::Rv:
      ans.value = apd_rv(net);
      break;
    case Engine::Decomp:
      ans.value = apd_decomposed(net, opts.switching_cap);
      break;
    case Engine::SwDp: {
      TreeExtension ext =
          opts.extension ? *opts.extension : scanwidth_heuristic(net).extension;
      ans.value = run_dp<Rational>(net, ext);
      break;
    }
    case Engine::Auto:
      throw ContractError("engine resolution failed");
  }
  return ans;
}

// APD(Z) for a taxon subset: every engine computes APD(X) of the subnetwork
// induced by Z (inherited probabilities are unchanged, so it stays normal).
inline ApdAnswer apd_engine_subset(const PhyloNetwork& net, const TaxonSet& z, Engine engine,
                                   const ApdOptions& opts = {}) {
  if (z.empty()) return {Rational(0), engine};
  return apd_engine(induce(net, z).net, engine, opts);
}

}  // namespace apdkit
