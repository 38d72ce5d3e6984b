#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lbd::rng {

using Counter = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

/// Philox-4x64 with 10 rounds.
inline Counter philox(Counter ctr, Key key) noexcept {
  constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += W0;
      key[1] += W1;
    }
    const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * ctr[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint64_t>(p0 >> 64), lo0 = static_cast<std::uint64_t>(p0);
    const auto hi1 = static_cast<std::uint64_t>(p1 >> 64), lo1 = static_cast<std::uint64_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Uniform random bit generator over one Philox stream. The key holds
/// (seed, path); the first three counter words name the sub-stream and the
/// last one enumerates blocks.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t path, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) noexcept
      : key_{seed, path}, ctr_{a, b, c, 0} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 4) {
      buf_ = philox(ctr_, key_);
      ++ctr_[3];
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  Key key_;
  Counter ctr_;
  Counter buf_{};
  int pos_ = 4;
};

}  // namespace lbd::rng
