#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace mra {

using Rng = std::mt19937_64;

/// Builds an engine from a base seed and a stream path. Distinct paths give
/// independent streams, so per-sample randomness can be keyed by
/// (seed, epoch, index) without threading a single engine through a loop.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> stream);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

double uniform01(Rng& rng);
double sample_beta(Rng& rng, double alpha, double beta);

}  // namespace mra
