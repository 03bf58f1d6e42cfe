#pragma once

#include <cstdint>
#include <random>

namespace anchorlab {

// splitmix64 finalizer; also used to derive independent per-run and
// per-trial streams: seed_i = scramble(base_seed, i).
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t scramble(std::uint64_t base_seed, std::uint64_t index) noexcept;

// Single-owner PRNG state. The engine is mt19937_64, whose output sequence is
// fixed by the standard; the real-valued transforms below are written out
// explicitly so that draws are bitwise reproducible across standard libraries
// (std::*_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1): (k + 0.5) / 2^53.
  double uniform_open();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi] (inclusive), by rejection.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  // Standard normal via the Box-Muller transform (cosine branch only; no
  // cached second variate, so every call consumes exactly two uniforms).
  double normal();
  // Standard exponential, -ln(u).
  double exponential();

 private:
  std::mt19937_64 engine_;
};

}  // namespace anchorlab
