#pragma once

#include <cstdint>
#include <limits>

namespace cosmoqm {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream. Output i of stream (seed, id) is a pure
/// function of (seed, id, i), so split() children are reproducible no matter
/// which thread consumes them or in what order. Not thread-safe; give each
/// thread its own stream.
///
/// Satisfies std::uniform_random_bit_generator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed),
        stream_id_(stream_id),
        key_(detail::splitmix64(seed ^ detail::splitmix64(stream_id + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return at(counter_++); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Independent child stream; does not advance this stream.
  RngStream split(std::uint64_t child) const noexcept {
    return RngStream(seed_, detail::splitmix64(stream_id_ ^ detail::splitmix64(child + 1)));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  result_type at(std::uint64_t i) const noexcept {
    return detail::splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (i + 1));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cosmoqm
