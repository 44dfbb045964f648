// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Counter-based random streams.
//
// Every stream is Philox4x32-10 keyed by the 64-bit root seed. The 128-bit
// counter is split into a 64-bit lineage word (worker, round, purpose packed
// injectively) and a 64-bit draw index, so two streams with different
// lineages never share a counter block and a stream's output depends only on
// (root_seed, lineage), never on evaluation order.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "byzsim/error.hpp"

namespace byzsim {

/// What a stream is used for. Part of the lineage, so different purposes at
/// the same (worker, round) are independent.
enum class Purpose : std::uint8_t {
  Sample = 0,
  Init = 1,
  Compress = 2,
  Partition = 3,
  Synthetic = 4,
  IterateSelect = 5,
  MonteCarlo = 6,
  Attack = 7,
};

/// Worker id reserved for streams that belong to the server or the harness.
inline constexpr std::uint32_t kServerStream = 0xFFFFFFu;
inline constexpr std::uint32_t kMaxWorkerId = 0xFFFFFFu;

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace detail

/// Where a stream comes from. Packing: worker (24 bits) | round (32 bits) |
/// purpose (8 bits).
struct Lineage {
  std::uint64_t root_seed = 0;
  std::uint32_t worker = 0;
  std::uint32_t round = 0;
  Purpose purpose = Purpose::Sample;

  std::uint64_t packed() const noexcept {
    return (static_cast<std::uint64_t>(worker & kMaxWorkerId) << 40) |
           (static_cast<std::uint64_t>(round) << 8) | static_cast<std::uint64_t>(purpose);
  }
};

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(const Lineage& lineage) : lineage_(lineage) {
    key_ = {static_cast<std::uint32_t>(lineage.root_seed),
            static_cast<std::uint32_t>(lineage.root_seed >> 32)};
    const std::uint64_t tag = lineage.packed();
    tag_ = {static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  const Lineage& lineage() const noexcept { return lineage_; }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    if (buffered_ == 0) refill();
    const std::uint64_t out = buffer_[2 - buffered_];
    --buffered_;
    return out;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection, unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw RangeError("uniform_index: empty range");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller; the second variate is kept for the next call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block_),
                                              static_cast<std::uint32_t>(block_ >> 32), tag_[0],
                                              tag_[1]};
    const auto out = detail::philox4x32_10(ctr, key_);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
    ++block_;
  }

  Lineage lineage_;
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 2> tag_{};
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Pure mapping from lineage to a fresh stream positioned at its first draw.
inline RngStream derive_stream(std::uint64_t root_seed, std::uint32_t worker_id,
                               std::uint32_t round, Purpose purpose) {
  if (worker_id > kMaxWorkerId) throw RangeError("derive_stream: worker id exceeds 24 bits");
  return RngStream(Lineage{root_seed, worker_id, round, purpose});
}

}  // namespace byzsim
