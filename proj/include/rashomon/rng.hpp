#pragma once

// Deterministic random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), state seeded through SplitMix64.
// Streams are derived with substream(seed, label, index): the label is hashed
// with 64-bit FNV-1a and mixed with seed and index through SplitMix64, so
// differently-labelled streams are statistically independent and never depend
// on the order in which they are created.
//
// Normal variates use the basic Box-Muller transform; both outputs of each
// pair are consumed in order. Uniform integers use rejection sampling so no
// standard-library distribution (whose output is implementation defined) is
// involved anywhere.

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace rashomon {

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view text);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0();
  double normal();
  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of an independent stream identified by (seed, label, index).
std::uint64_t substream_seed(std::uint64_t seed, std::string_view label,
                             std::uint64_t index = 0);

inline Rng substream(std::uint64_t seed, std::string_view label,
                     std::uint64_t index = 0) {
  return Rng(substream_seed(seed, label, index));
}

}  // namespace rashomon
