#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rbe {

// All randomness flows through explicitly passed engines; nothing is global.
using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Stable 64-bit hash of a stream label (FNV-1a).
std::uint64_t hash_label(std::string_view label);

// Independent substream for (seed, stream id). Same inputs give the same engine state.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);
Rng make_rng(std::uint64_t seed, std::string_view stream);

double standard_normal(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

}  // namespace rbe
