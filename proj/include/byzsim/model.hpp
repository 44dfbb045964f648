// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// L2-regularized binary logistic regression:
//   f(x, (a, b)) = log(1 + exp(-b a.x)) + lambda ||x||^2
// Note the regularizer is lambda ||x||^2, not lambda/2 ||x||^2.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "byzsim/core.hpp"
#include "byzsim/data.hpp"
#include "byzsim/error.hpp"

namespace byzsim {

struct LogRegProblem {
  LogRegProblem() = default;
  LogRegProblem(Dataset shard_in, double lambda_in)
      : shard(std::move(shard_in)), lambda(lambda_in) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  }

  /// lambda = 1 / (local sample count).
  static LogRegProblem with_default_lambda(Dataset shard_in) {
    const double lam = 1.0 / static_cast<double>(shard_in.size());
    return LogRegProblem(std::move(shard_in), lam);
  }

  std::size_t dim() const noexcept { return shard.dim(); }
  std::size_t size() const noexcept { return shard.size(); }

  Dataset shard;
  double lambda = 0.0;
};

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline void check_point(const LogRegProblem& p, std::span<const double> x) {
  require_same_dim(x.size(), p.dim(), "logistic model point");
}

inline void check_index(const LogRegProblem& p, std::size_t j) {
  if (j >= p.size()) {
    throw RangeError("sample index " + std::to_string(j) + " out of range (m = " +
                     std::to_string(p.size()) + ")");
  }
}

/// acc[k] += -b s(-b a.x) a[k] + 2 lambda x[k], the elementwise form of
/// stoch_grad; full_grad relies on this exact evaluation order.
inline void accumulate_grad(const LogRegProblem& p, std::span<const double> x, std::size_t j,
                            std::span<double> acc) {
  const auto a = p.shard.row(j);
  const double b = p.shard.label(j);
  const double coef = -b * sigmoid(-b * dot(a, x));
  const double reg = 2.0 * p.lambda;
  for (std::size_t k = 0; k < a.size(); ++k) acc[k] += coef * a[k] + reg * x[k];
}

}  // namespace detail

inline double loss(const LogRegProblem& p, std::span<const double> x) {
  detail::check_point(p, x);
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    s += softplus(-p.shard.label(j) * dot(p.shard.row(j), x));
  }
  return s / static_cast<double>(p.size()) + p.lambda * norm_sq(x);
}

inline Vector stoch_grad(const LogRegProblem& p, std::span<const double> x, std::size_t j) {
  detail::check_point(p, x);
  detail::check_index(p, j);
  Vector g(x.size(), 0.0);
  detail::accumulate_grad(p, x, j, g);
  return g;
}

/// Average of stoch_grad over the given indices, summed in the given order.
inline Vector batch_grad(const LogRegProblem& p, std::span<const double> x,
                         std::span<const std::size_t> indices) {
  detail::check_point(p, x);
  if (indices.empty()) throw ConfigError("batch_grad: empty batch");
  Vector g(x.size(), 0.0);
  for (std::size_t j : indices) {
    detail::check_index(p, j);
    detail::accumulate_grad(p, x, j, g);
  }
  const double m = static_cast<double>(indices.size());
  for (double& v : g) v /= m;
  return g;
}

inline Vector full_grad(const LogRegProblem& p, std::span<const double> x) {
  detail::check_point(p, x);
  Vector g(x.size(), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) detail::accumulate_grad(p, x, j, g);
  const double m = static_cast<double>(p.size());
  for (double& v : g) v /= m;
  return g;
}

/// Loss and full gradient in one pass over the shard (metrics path).
inline std::pair<double, Vector> loss_and_grad(const LogRegProblem& p, std::span<const double> x) {
  detail::check_point(p, x);
  Vector g(x.size(), 0.0);
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto a = p.shard.row(j);
    const double b = p.shard.label(j);
    const double z = -b * dot(a, x);
    s += softplus(z);
    const double coef = -b * sigmoid(z);
    for (std::size_t k = 0; k < a.size(); ++k) g[k] += coef * a[k];
  }
  const double m = static_cast<double>(p.size());
  const double reg = 2.0 * p.lambda;
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = g[k] / m + reg * x[k];
  return {s / m + p.lambda * norm_sq(x), std::move(g)};
}

/// Gradients at two points for one shared sample index (STORM/SARAH correction).
inline std::pair<Vector, Vector> stoch_grad_pair(const LogRegProblem& p,
                                                 std::span<const double> x_new,
                                                 std::span<const double> x_old, std::size_t j) {
  return {stoch_grad(p, x_new, j), stoch_grad(p, x_old, j)};
}

/// Batch version of stoch_grad_pair.
inline std::pair<Vector, Vector> batch_grad_pair(const LogRegProblem& p,
                                                 std::span<const double> x_new,
                                                 std::span<const double> x_old,
                                                 std::span<const std::size_t> indices) {
  return {batch_grad(p, x_new, indices), batch_grad(p, x_old, indices)};
}

/// Per-sample smoothness bound max_j ||a_j||^2 / 4 + 2 lambda.
inline double sample_lipschitz_bound(const LogRegProblem& p) {
  double mx = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) mx = std::max(mx, norm_sq(p.shard.row(j)));
  return mx / 4.0 + 2.0 * p.lambda;
}

}  // namespace byzsim
