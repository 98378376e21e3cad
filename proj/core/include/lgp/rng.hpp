#pragma once

// Counter-based seed splitting: every consumer of randomness derives its own
// generator from (base seed, stream, index) so results do not depend on the
// order in which consumers run.

#include <cstdint>
#include <random>

#include "lgp/types.hpp"

namespace lgp {

enum class RngStream : std::uint64_t {
  data_noise = 1,
  optimizer = 2,
  mc_sample = 3,
  diagnostics = 4,
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, RngStream stream,
                                        std::uint64_t index) noexcept;

[[nodiscard]] std::mt19937_64 make_generator(std::uint64_t base, RngStream stream,
                                             std::uint64_t index);

/// Zero-mean Gaussian draw with covariance `cov` (PSD). A zero covariance
/// gives an exactly zero sample.
[[nodiscard]] Vector sample_gaussian(std::mt19937_64& gen, const Matrix& cov);

}  // namespace lgp
