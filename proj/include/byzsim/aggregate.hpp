// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Robust aggregation rules and nearest-neighbor mixing (NNM).
//
// All rules take n vectors of a common length and are deterministic:
// coordinate sorts are total, NNM breaks distance ties by input index.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "byzsim/core.hpp"
#include "byzsim/error.hpp"

namespace byzsim {

namespace detail {

inline std::size_t check_inputs(std::span<const Vector> vectors, const char* rule) {
  if (vectors.empty()) throw ConfigError(std::string(rule) + ": empty input");
  const std::size_t d = vectors.front().size();
  for (const auto& v : vectors) require_same_dim(v.size(), d, rule);
  return d;
}

}  // namespace detail

inline Vector mean(std::span<const Vector> vectors) {
  detail::check_inputs(vectors, "mean");
  return mean_of(vectors);
}

/// Per-coordinate median; even n averages the two middle order statistics.
inline Vector coordinate_median(std::span<const Vector> vectors) {
  const std::size_t d = detail::check_inputs(vectors, "coordinate_median");
  const std::size_t n = vectors.size();
  Vector out(d);
  std::vector<double> col(n);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) col[i] = vectors[i][k];
    std::sort(col.begin(), col.end());
    out[k] = (n % 2 == 1) ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
  }
  return out;
}

/// Per-coordinate trimmed mean: drop the trim smallest and trim largest
/// values, average the middle n - 2 trim in ascending order.
inline Vector cwtm(std::span<const Vector> vectors, std::size_t trim) {
  const std::size_t d = detail::check_inputs(vectors, "cwtm");
  const std::size_t n = vectors.size();
  if (2 * trim >= n) {
    throw ConfigError("cwtm: 2B = " + std::to_string(2 * trim) + " must be below n = " +
                      std::to_string(n));
  }
  Vector out(d);
  std::vector<double> col(n);
  const double kept = static_cast<double>(n - 2 * trim);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) col[i] = vectors[i][k];
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (std::size_t i = trim; i < n - trim; ++i) s += col[i];
    out[k] = s / kept;
  }
  return out;
}

/// Smoothed Weiszfeld iterations for the geometric median, started at the
/// coordinate-wise mean: x <- sum w_j v_j / sum w_j, w_j = 1 / max(nu, ||x - v_j||).
inline Vector rfa(std::span<const Vector> vectors, std::size_t steps, double smoothing) {
  const std::size_t d = detail::check_inputs(vectors, "rfa");
  if (steps < 1) throw ConfigError("rfa: steps must be >= 1");
  if (!(smoothing > 0.0)) throw ConfigError("rfa: smoothing must be > 0");
  Vector x = mean_of(vectors);
  Vector next(d);
  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    double wsum = 0.0;
    for (const auto& v : vectors) {
      const double w = 1.0 / std::max(smoothing, std::sqrt(dist_sq(x, v)));
      wsum += w;
      axpy(w, v, next);
    }
    for (std::size_t k = 0; k < d; ++k) x[k] = next[k] / wsum;
  }
  return x;
}

/// Sum of Euclidean distances from x to the points (the geometric-median objective).
inline double geomedian_objective(std::span<const double> x, std::span<const Vector> points) {
  double s = 0.0;
  for (const auto& p : points) s += std::sqrt(dist_sq(x, p));
  return s;
}

/// Replaces every input by the mean of its n - byzantine nearest inputs
/// (itself included). Selected neighbors are summed in input-index order.
inline std::vector<Vector> nnm(std::span<const Vector> vectors, std::size_t byzantine) {
  const std::size_t d = detail::check_inputs(vectors, "nnm");
  const std::size_t n = vectors.size();
  if (2 * byzantine >= n) {
    throw ConfigError("nnm: B = " + std::to_string(byzantine) + " must be below n/2 (n = " +
                      std::to_string(n) + ")");
  }
  const std::size_t keep = n - byzantine;

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = dist_sq(vectors[i], vectors[j]);
    }
  }

  std::vector<Vector> out(n, Vector(d, 0.0));
  std::vector<std::size_t> order(n);
  std::vector<char> chosen(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = dist.data() + i * n;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + (keep - 1), order.end(),
                     [row](std::size_t a, std::size_t b) {
                       return row[a] < row[b] || (row[a] == row[b] && a < b);
                     });
    std::fill(chosen.begin(), chosen.end(), 0);
    for (std::size_t r = 0; r < keep; ++r) chosen[order[r]] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (chosen[j]) add_into(vectors[j], out[i]);
    }
    for (double& v : out[i]) v /= static_cast<double>(keep);
  }
  return out;
}

struct AggregatorSpec {
  enum class Base { Mean, CM, CWTM, RFA };

  Base base = Base::Mean;
  std::size_t trim = 0;             // CWTM
  std::size_t rfa_steps = 8;        // RFA
  double rfa_smoothing = 1e-6;      // RFA
  std::optional<std::size_t> nnm;   // NNM pre-mixing with this Byzantine bound

  static AggregatorSpec mean() { return {}; }
  static AggregatorSpec cm() {
    AggregatorSpec s;
    s.base = Base::CM;
    return s;
  }
  static AggregatorSpec cwtm(std::size_t trim) {
    AggregatorSpec s;
    s.base = Base::CWTM;
    s.trim = trim;
    return s;
  }
  static AggregatorSpec rfa(std::size_t steps = 8, double smoothing = 1e-6) {
    AggregatorSpec s;
    s.base = Base::RFA;
    s.rfa_steps = steps;
    s.rfa_smoothing = smoothing;
    return s;
  }

  AggregatorSpec with_nnm(std::size_t byzantine) const {
    AggregatorSpec s = *this;
    s.nnm = byzantine;
    return s;
  }

  void validate(std::size_t n) const {
    if (base == Base::CWTM && 2 * trim >= n) throw ConfigError("cwtm requires 2B < n");
    if (base == Base::RFA && rfa_steps < 1) throw ConfigError("rfa steps must be >= 1");
    if (base == Base::RFA && !(rfa_smoothing > 0.0)) throw ConfigError("rfa smoothing must be > 0");
    if (nnm && 2 * *nnm >= n) throw ConfigError("nnm requires B < n/2");
  }
};

inline Vector apply_base(const AggregatorSpec& spec, std::span<const Vector> vectors) {
  switch (spec.base) {
    case AggregatorSpec::Base::Mean:
      return mean(vectors);
    case AggregatorSpec::Base::CM:
      return coordinate_median(vectors);
    case AggregatorSpec::Base::CWTM:
      return cwtm(vectors, spec.trim);
    case AggregatorSpec::Base::RFA:
      return rfa(vectors, spec.rfa_steps, spec.rfa_smoothing);
  }
  throw ConfigError("unknown aggregator");
}

/// F(vectors), or F(NNM(vectors)) when the spec carries an NNM bound.
inline Vector aggregate(const AggregatorSpec& spec, std::span<const Vector> vectors) {
  detail::check_inputs(vectors, "aggregate");
  spec.validate(vectors.size());
  if (spec.nnm) {
    const auto mixed = nnm(vectors, *spec.nnm);
    return apply_base(spec, mixed);
  }
  return apply_base(spec, vectors);
}

/// Empirical robustness ratio on a subset S:
///   ||F - mean_S||^2 * |S| / sum_{i in S} ||g_i - mean_S||^2.
/// Returns 0 when both sides vanish and +inf when only the spread does.
inline double kappa_ratio(std::span<const double> aggregate_out, std::span<const Vector> subset) {
  const Vector centre = mean_of(subset);
  const double lhs = dist_sq(aggregate_out, centre);
  double spread = 0.0;
  for (const auto& g : subset) spread += dist_sq(g, centre);
  if (spread == 0.0) return lhs == 0.0 ? 0.0 : INFINITY;
  return lhs * static_cast<double>(subset.size()) / spread;
}

}  // namespace byzsim
