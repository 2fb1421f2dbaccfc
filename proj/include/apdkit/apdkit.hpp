#pragma once

// Umbrella header: average-tree phylogenetic diversity on rooted networks.

#include "apdkit/decomp.hpp"
#include "apdkit/engine.hpp"
#include "apdkit/errors.hpp"
#include "apdkit/extension.hpp"
#include "apdkit/generate.hpp"
#include "apdkit/io.hpp"
#include "apdkit/maxapd.hpp"
#include "apdkit/network.hpp"
#include "apdkit/rational.hpp"
#include "apdkit/rv.hpp"
#include "apdkit/sw_dp.hpp"
#include "apdkit/switching.hpp"
