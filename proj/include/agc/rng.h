#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace agc {

// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Seed of the stream identified by (master, index, tag):
//   splitmix64(splitmix64(splitmix64(master) ^ index) ^ tag)
// The dataset header records this formula.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index,
                       std::uint64_t tag);

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions are implemented here
// because the standard library ones are implementation-defined, and the
// dataset must be bit-identical across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  bool coin() { return (engine_() >> 63) != 0; }
  // Box-Muller; consumes exactly two uniforms per draw.
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace agc
