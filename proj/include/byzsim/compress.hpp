// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Contractive compressors: E||C(x) - x||^2 <= (1 - alpha) ||x||^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "byzsim/core.hpp"
#include "byzsim/error.hpp"
#include "byzsim/rng.hpp"

namespace byzsim {

struct CompressorSpec {
  enum class Kind { Identity, TopK, RandK };

  Kind kind = Kind::Identity;
  std::size_t k = 0;
  /// RandK only: multiply retained values by d/k (unbiased convention). Off
  /// by default; the contractive convention keeps original values.
  bool scaled = false;

  static CompressorSpec identity() { return {}; }
  static CompressorSpec top_k(std::size_t k) { return {Kind::TopK, k, false}; }
  static CompressorSpec rand_k(std::size_t k, bool scaled = false) {
    return {Kind::RandK, k, scaled};
  }

  void validate(std::size_t d) const {
    if (kind != Kind::Identity && (k < 1 || k > d)) {
      throw ConfigError("compressor k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(d) + "]");
    }
  }
};

/// Sparse update: strictly increasing indices below dim.
struct SparseMessage {
  struct Entry {
    std::uint32_t index;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  static constexpr std::size_t kIndexBytes = 4;
  static constexpr std::size_t kValueBytes = 8;

  std::vector<Entry> entries;
  std::size_t dim = 0;

  std::size_t byte_cost() const noexcept { return entries.size() * (kIndexBytes + kValueBytes); }

  /// Every coordinate of x, zeros included.
  static SparseMessage dense(std::span<const double> x) {
    SparseMessage msg;
    msg.dim = x.size();
    msg.entries.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      msg.entries.push_back({static_cast<std::uint32_t>(i), x[i]});
    }
    return msg;
  }

  friend bool operator==(const SparseMessage&, const SparseMessage&) = default;
};

inline double alpha_of(const CompressorSpec& spec, std::size_t d) {
  if (spec.kind == CompressorSpec::Kind::Identity) return 1.0;
  spec.validate(d);
  return static_cast<double>(spec.k) / static_cast<double>(d);
}

inline Vector densify(const SparseMessage& msg) {
  Vector out(msg.dim, 0.0);
  for (const auto& e : msg.entries) {
    if (e.index >= msg.dim) throw RangeError("sparse message index out of range");
    out[e.index] = e.value;
  }
  return out;
}

/// Applies spec to x. TopK keeps the k largest |x_i| (ties: lower index),
/// RandK keeps k coordinates drawn uniformly without replacement from rng.
/// rng is only read by RandK.
inline SparseMessage compress(const CompressorSpec& spec, std::span<const double> x,
                              RngStream& rng) {
  const std::size_t d = x.size();
  if (spec.kind == CompressorSpec::Kind::Identity) return SparseMessage::dense(x);
  spec.validate(d);

  std::vector<std::uint32_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0u);
  if (spec.kind == CompressorSpec::Kind::TopK) {
    auto by_magnitude = [&](std::uint32_t a, std::uint32_t b) {
      const double fa = std::abs(x[a]);
      const double fb = std::abs(x[b]);
      return fa > fb || (fa == fb && a < b);
    };
    if (spec.k < d) std::nth_element(idx.begin(), idx.begin() + spec.k, idx.end(), by_magnitude);
  } else {
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < spec.k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(d - i));
      std::swap(idx[i], idx[j]);
    }
  }
  idx.resize(spec.k);
  std::sort(idx.begin(), idx.end());

  const double s = (spec.kind == CompressorSpec::Kind::RandK && spec.scaled)
                       ? static_cast<double>(d) / static_cast<double>(spec.k)
                       : 1.0;
  SparseMessage msg;
  msg.dim = d;
  msg.entries.reserve(spec.k);
  for (std::uint32_t i : idx) msg.entries.push_back({i, s == 1.0 ? x[i] : s * x[i]});
  return msg;
}

}  // namespace byzsim
