#pragma once

#include <cstdint>
#include <random>

#include "kflow/tensor.hpp"

namespace kflow {

/// Deterministic random source keyed by (seed, stream).
///
/// The engine is std::mt19937_64 seeded through std::seed_seq, both of which are
/// fully specified by the standard; normals come from Box-Muller rather than
/// std::normal_distribution, whose algorithm is implementation-defined.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// I.i.d. standard normal tensor.
Tensor randn(SeededRng& rng, const Shape& shape);

}  // namespace kflow
