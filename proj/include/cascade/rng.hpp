#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cascade {

// Mixes a list of integers (seed, sample id, round, ...) into a single
// stream key. Every random draw in the project is keyed this way so results
// do not depend on scheduling order.
std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts);

// Deterministic generator with platform-independent sampling helpers.
// The std:: distributions are implementation-defined, so they are avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01();
  // Standard normal via the Box-Muller transform.
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cascade
