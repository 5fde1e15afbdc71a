#pragma once

#include <cstdint>
#include <random>

namespace bgnn {

using Rng = std::mt19937_64;

// Independent streams derived from one run seed, so that e.g. turning
// dropout on or off never shifts weight initialization.
enum class Stream : std::uint32_t {
  Init = 1,
  Dropout = 2,
  Split = 3,
  Synthetic = 4,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace bgnn
