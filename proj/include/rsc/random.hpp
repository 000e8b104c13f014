#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rsc {

//! Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//!
//! A draw is a pure function of (key, counter). The 64-bit seed is the key;
//! the 128-bit counter is split into a 64-bit block index (low words) and a
//! 64-bit stream id (high words). Independent streams are therefore obtained
//! by changing the stream id, never by re-seeding.
class Philox4x32
{
public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed) noexcept
    : key_{ static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32) }
  {}

  Block operator()(std::uint64_t stream, std::uint64_t index) const noexcept;

  //! Raw interface, used for known-answer tests.
  static Block bijection(Block counter, std::array<std::uint32_t, 2> key) noexcept;

private:
  std::array<std::uint32_t, 2> key_;
};

//! Stream ids are tagged by purpose in the top byte so the data of
//! replication r, the spline subsample of replication r and the
//! population draws never share counters.
enum class StreamPurpose : std::uint64_t
{
  Data = 0,
  Subsample = 1,
  Population = 2,
  Bench = 3,
};

constexpr std::uint64_t
stream_id(StreamPurpose purpose, std::uint64_t index) noexcept
{
  return (static_cast<std::uint64_t>(purpose) << 56) | (index & 0x00ffffffffffffffULL);
}

//! Sequential 64-bit engine over one Philox stream; satisfies
//! UniformRandomBitGenerator.
class RandomStream
{
public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : gen_(seed)
    , stream_(stream)
  {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept
  {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  //! Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  //! Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift).
  std::uint64_t below(std::uint64_t bound) noexcept;

private:
  Philox4x32 gen_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Block buffer_{};
  int used_ = 4;
};

//! 53-bit uniform on [0, 1) from a 64-bit word.
constexpr double
to_unit(std::uint64_t word) noexcept
{
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

} // namespace rsc
