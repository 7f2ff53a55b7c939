#pragma once

#include <cstdint>
#include <random>

namespace parstable {

/// Seeded pseudo-random stream. A (seed, stream id) pair fully determines the
/// draw sequence, so Monte Carlo replicate i can own stream i regardless of
/// the order in which replicates run.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream keyed by `id`; independent of how many draws this stream
  /// has already produced.
  RandomStream substream(std::uint64_t id) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Exponential with unit mean.
  double exponential();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace parstable
