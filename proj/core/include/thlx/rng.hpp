#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "thlx/types.hpp"

namespace thlx {

/// Identifier recorded in run metadata: the uniform engine and the
/// uniform-to-Gaussian transform are both fixed so that identical
/// (seed, stream) pairs reproduce draws bit-for-bit everywhere.
inline constexpr const char* kRngAlgorithm = "mt19937_64/box-muller-v1";

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// One deterministic stream. Gaussian variates come from Box-Muller on
/// 53-bit uniforms, never from std::normal_distribution.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed_word) : eng_(seed_word) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// +1 or -1 with equal probability.
  double sign() { return (eng_() & 1ULL) ? 1.0 : -1.0; }

  /// Uniform integer in [0, bound).
  Index uniform_index(Index bound) {
    return static_cast<Index>(eng_() % static_cast<std::uint64_t>(bound));
  }

  /// k distinct indices from [0, p), order of selection (partial Fisher-Yates).
  std::vector<Index> sample_indices(Index p, Index k) {
    std::vector<Index> pool(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < k; ++i) {
      const Index j = i + uniform_index(p - i);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Master seed plus stream derivation; streams with distinct ids are
/// independent for all practical purposes and reproducible bit-for-bit.
struct RandomSource {
  std::uint64_t master_seed = 0;

  explicit RandomSource(std::uint64_t seed) : master_seed(seed) {}

  RngStream stream(std::uint64_t stream_id) const {
    const std::uint64_t mixed =
        detail::splitmix64(detail::splitmix64(master_seed) ^
                           detail::splitmix64(stream_id + 0x51ED270B7A4F52ADULL));
    return RngStream(mixed);
  }
};

}  // namespace thlx
