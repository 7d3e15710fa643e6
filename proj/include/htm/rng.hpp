#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace htm {

// Stream roles used in seed derivation. Path randomness and the randomness of
// independent horizons must never share a stream.
enum class StreamRole : std::uint64_t {
  Path = 0,
  // IndependentTime rule with stream id k uses role IndependentBase + k.
  IndependentBase = 1,
};

/// Deterministic 64-bit mix of (master seed, replicate index, stream role).
std::uint64_t hash64(std::uint64_t master_seed, std::uint64_t replicate_index,
                     std::uint64_t stream_role);

inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t replicate,
                                 StreamRole role, std::uint64_t offset = 0) {
  return hash64(master_seed, replicate, static_cast<std::uint64_t>(role) + offset);
}

/// A positioned random stream. Copyable; copies continue independently from
/// the same position.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate.
  double normal() { return normal_(engine_); }

  /// Exponential variate with unit rate.
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace htm
