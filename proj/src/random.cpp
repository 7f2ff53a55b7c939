#include "parstable/random.hpp"

#include <cmath>

namespace parstable {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(stream_id ^ 0x5851f42d4c957f2dULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RandomStream RandomStream::substream(std::uint64_t id) const {
  return RandomStream(splitmix64(seed_ ^ splitmix64(stream_id_)), id);
}

double RandomStream::uniform() {
  // 53 random mantissa bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential() { return -std::log(uniform()); }

}  // namespace parstable
