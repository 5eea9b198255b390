#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "chnet/matrix.hpp"

namespace chnet {

/// Counter-based random stream (Philox4x32-10) keyed by a 64-bit seed and a
/// 64-bit stream id. The output sequence depends only on (seed, stream_id),
/// so parallel workers take distinct stream ids, or substreams of one, and
/// stay reproducible without coordination.
///
/// Single owner: do not share one instance between threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent child stream; the parent's position is irrelevant.
  RngStream substream(std::uint64_t index) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Uniform integer on [0, n), unbiased. n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal (Box-Muller, pairs cached).
  double normal() noexcept;
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Top-level stream ids. Each consumer derives everything from substreams of
/// its own id, so training data, initialization and evaluation never overlap.
inline constexpr std::uint64_t kEvalStreams = 0x01ull << 56;
inline constexpr std::uint64_t kTrainStreams = 0x02ull << 56;
inline constexpr std::uint64_t kInitStreams = 0x03ull << 56;

/// One Philox4x32-10 block: counter and key in, four random words out.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// n i.i.d. standard normal draws.
RealVector gaussian(RngStream& stream, std::size_t n);

/// SplitMix64 finalizer; used to derive substream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace chnet
