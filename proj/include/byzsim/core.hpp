// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense vector arithmetic shared by every module. A Vector is a plain
// std::vector<double>; all routines check lengths and evaluate elementwise in
// index order so results are bit-reproducible.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "byzsim/error.hpp"

namespace byzsim {

using Vector = std::vector<double>;

inline void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw DimensionError(std::string(where) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

inline Vector zeros(std::size_t d) { return Vector(d, 0.0); }

inline Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scale(std::span<const double> a, double s) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

/// y += s * x
inline void axpy(double s, std::span<const double> x, std::span<double> y) {
  require_same_dim(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

/// y += x
inline void add_into(std::span<const double> x, std::span<double> y) {
  require_same_dim(x.size(), y.size(), "add_into");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += x[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dist_sq");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Arithmetic mean: sum in input order, then divide by the count.
inline Vector mean_of(std::span<const Vector> vectors) {
  if (vectors.empty()) throw ConfigError("mean of an empty set");
  const std::size_t d = vectors.front().size();
  Vector acc(d, 0.0);
  for (const auto& v : vectors) add_into(v, acc);
  const double n = static_cast<double>(vectors.size());
  for (double& a : acc) a /= n;
  return acc;
}

}  // namespace byzsim
