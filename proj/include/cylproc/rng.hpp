#pragma once

// Counter-based random streams.
//
// The generator is Philox4x32-10 (Salmon et al., SC 2011). A stream is
// identified by (seed, stream_id, substream); the 128-bit counter is laid out
// as [block_lo, block_hi, substream, stream_id] and the 64-bit seed is the key.
// Every variate below is derived from raw 32-bit words with integer and IEEE
// arithmetic only, so a given (seed, stream_id, substream) produces the same
// sequence on every platform with IEEE doubles and a conforming libm.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cylproc {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
    return ctr;
  }
};

/// Sequential view of one Philox stream. Cheap to copy; copies continue
/// independently from the same position.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint32_t stream_id,
               std::uint32_t substream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id),
        substream_(substream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  std::uint32_t next_u32() noexcept {
    if (used_ == 4) refill();
    return block_[used_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  result_type operator()() noexcept { return next_u64(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer on [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

  /// Standard exponential variate.
  double exponential() noexcept { return -std::log1p(-uniform()); }

  /// Poisson variate by counting unit-rate arrivals in [0, mean].
  /// Cost is O(mean); every caller here has means in the low thousands.
  std::uint64_t poisson(double mean) noexcept {
    if (!(mean > 0.0)) return 0;
    std::uint64_t n = 0;
    double t = exponential();
    while (t <= mean) {
      ++n;
      t += exponential();
    }
    return n;
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(1.0 - u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log1p(-u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  /// Standard normal by the polar Box-Muller method (no cached second value,
  /// so the stream position depends only on the number of calls).
  double normal() noexcept {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  std::uint64_t block_index() const noexcept { return block_index_; }

 private:
  void refill() noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_index_),
                                  static_cast<std::uint32_t>(block_index_ >> 32),
                                  substream_, stream_id_};
    block_ = Philox4x32::apply(ctr, key_);
    ++block_index_;
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_id_;
  std::uint32_t substream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter block_{};
  int used_ = 4;
};

}  // namespace cylproc
