#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace metamarket {

/// SplitMix64 finalizer. Used to derive independent per-run streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream seed for run `run_index` under `master_seed`:
/// mix64(master_seed ^ mix64(run_index)).
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t run_index) noexcept {
  return mix64(master_seed ^ mix64(run_index));
}

/// Seeded engine with platform-independent uniform draws. The standard
/// distributions are implementation-defined, so we only use the raw 64-bit
/// output of mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master_seed, std::uint64_t run_index)
      : engine_(stream_seed(master_seed, run_index)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) noexcept { return -std::log(1.0 - uniform()) / rate; }

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace metamarket
