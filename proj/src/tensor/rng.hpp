#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace attn {

/// PCG32 (XSH-RR, 64-bit state). All randomness in the project comes from
/// here so that a seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  /// Uniform in [0, bound). Unbiased (rejection on the low range).
  std::uint32_t below(std::uint32_t bound);
  /// Uniform float in [0, 1) with 24 bits of mantissa.
  float uniform_f();
  /// Uniform double in [0, 1) with 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent generator keyed by `key`; the parent stream is not advanced.
  Rng derive(std::uint64_t key) const;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(static_cast<std::uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// splitmix64 finalizer; used to hash (seed, index) pairs into per-item seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace attn
