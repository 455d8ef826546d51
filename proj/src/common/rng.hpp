#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "common/hash.hpp"

namespace comira {

// Reproducible generator: std::mt19937_64 (whose output sequence is fixed by
// the standard) with hand-rolled bounded draws, because the standard
// distributions are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Per-example seed: mixes the example id into the run seed.
  static std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view example_id) noexcept {
    return splitmix64(run_seed ^ fnv1a64(example_id));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0. Lemire's method with rejection.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace comira
