// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent oracles and closed-form evaluators. Nothing here is used by the
// training path: the brute-force routines are deliberately written a second
// way so that they can check the production rules.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "byzsim/aggregate.hpp"
#include "byzsim/compress.hpp"
#include "byzsim/core.hpp"
#include "byzsim/error.hpp"
#include "byzsim/model.hpp"
#include "byzsim/rng.hpp"

namespace byzsim::verify {

// ---------------------------------------------------------------------------
// Steady-state noise of single vs double momentum.

/// Var(u_inf) / Var(v_inf) = (2 - 2 eta + eta^2) / (2 - eta)^2.
inline double variance_ratio_theory(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("variance_ratio_theory: eta must lie in (0, 1)");
  const double two_minus = 2.0 - eta;
  return (2.0 - 2.0 * eta + eta * eta) / (two_minus * two_minus);
}

/// Var(v_inf) in units of sigma^2: eta / (2 - eta).
inline double single_momentum_var_theory(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("single_momentum_var_theory: eta must lie in (0, 1]");
  return eta / (2.0 - eta);
}

/// Var(u_inf) in units of sigma^2: eta (2 - 2 eta + eta^2) / (2 - eta)^3.
inline double double_momentum_var_theory(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("double_momentum_var_theory: eta must lie in (0, 1]");
  const double two_minus = 2.0 - eta;
  return eta * (2.0 - 2.0 * eta + eta * eta) / (two_minus * two_minus * two_minus);
}

struct MomentumChainStats {
  double var_v = 0.0;
  double var_u = 0.0;
  double eta = 0.0;
  double sigma = 0.0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;

  double ratio() const { return var_v > 0.0 ? var_u / var_v : 0.0; }
};

/// Scalar chains v <- (1-eta) v + eta g, u <- (1-eta) u + eta v with
/// g = mu + xi, xi ~ N(0, sigma^2), constant mu. The first half of the
/// horizon is burn-in; variances are taken over the second half.
inline MomentumChainStats mc_momentum_chains(double eta, double sigma, std::size_t horizon,
                                             std::uint64_t seed) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("mc_momentum_chains: eta must lie in (0, 1]");
  if (static_cast<double>(horizon) < 10.0 / eta) {
    throw ConfigError("mc_momentum_chains: horizon must be at least 10 / eta");
  }
  constexpr double kMu = 1.0;
  RngStream rng = derive_stream(seed, kServerStream, 0, Purpose::MonteCarlo);
  double v = kMu;
  double u = kMu;
  const std::size_t burn = horizon / 2;
  // Welford accumulators.
  double mean_v = 0.0, m2_v = 0.0, mean_u = 0.0, m2_u = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double g = kMu + sigma * rng.normal();
    v = (1.0 - eta) * v + eta * g;
    u = (1.0 - eta) * u + eta * v;
    if (t < burn) continue;
    ++count;
    const double dv = v - mean_v;
    mean_v += dv / static_cast<double>(count);
    m2_v += dv * (v - mean_v);
    const double du = u - mean_u;
    mean_u += du / static_cast<double>(count);
    m2_u += du * (u - mean_u);
  }
  MomentumChainStats st;
  st.var_v = m2_v / static_cast<double>(count);
  st.var_u = m2_u / static_cast<double>(count);
  st.eta = eta;
  st.sigma = sigma;
  st.horizon = horizon;
  st.seed = seed;
  return st;
}

// ---------------------------------------------------------------------------
// Aggregation oracles.

/// Long-run smoothed Weiszfeld (nu = 1e-12) from the coordinate-wise mean.
/// Throws if the objective ever increases.
inline Vector geomedian_oracle(std::span<const Vector> points, std::size_t iters = 10000) {
  if (points.empty()) throw ConfigError("geomedian_oracle: empty input");
  constexpr double kNu = 1e-12;
  const std::size_t d = points.front().size();
  Vector x(d, 0.0);
  for (const auto& p : points) {
    for (std::size_t k = 0; k < d; ++k) x[k] += p[k];
  }
  for (double& v : x) v /= static_cast<double>(points.size());

  auto objective = [&](const Vector& at) {
    double s = 0.0;
    for (const auto& p : points) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) sq += (at[k] - p[k]) * (at[k] - p[k]);
      s += std::sqrt(sq);
    }
    return s;
  };

  double prev = objective(x);
  for (std::size_t it = 0; it < iters; ++it) {
    Vector num(d, 0.0);
    double den = 0.0;
    for (const auto& p : points) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) sq += (x[k] - p[k]) * (x[k] - p[k]);
      const double w = 1.0 / std::max(kNu, std::sqrt(sq));
      den += w;
      for (std::size_t k = 0; k < d; ++k) num[k] += w * p[k];
    }
    Vector next(d);
    for (std::size_t k = 0; k < d; ++k) next[k] = num[k] / den;
    const double obj = objective(next);
    // Rounding can move a converged iterate by an ulp.
    if (obj > prev * (1.0 + 1e-12) + 1e-300) {
      throw Error("geomedian_oracle: objective increased at iteration " + std::to_string(it));
    }
    if (next == x) break;
    x = std::move(next);
    prev = std::min(prev, obj);
  }
  return x;
}

/// Trimmed mean by repeated removal of the current minimum and maximum, then
/// an ascending sum of what is left.
inline Vector cwtm_oracle(std::span<const Vector> vectors, std::size_t trim) {
  const std::size_t d = vectors.front().size();
  Vector out(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> col;
    for (const auto& v : vectors) col.push_back(v[k]);
    for (std::size_t r = 0; r < trim; ++r) {
      col.erase(std::min_element(col.begin(), col.end()));
      col.erase(std::max_element(col.begin(), col.end()));
    }
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (double c : col) s += c;
    out[k] = s / static_cast<double>(col.size());
  }
  return out;
}

/// NNM by rank counting: j is a neighbor of i when fewer than G inputs
/// precede it in (distance, index) order.
inline std::vector<Vector> nnm_oracle(std::span<const Vector> vectors, std::size_t byzantine) {
  const std::size_t n = vectors.size();
  const std::size_t d = vectors.front().size();
  const std::size_t keep = n - byzantine;
  auto sq = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = vectors[a][k] - vectors[b][k];
      s += diff * diff;
    }
    return s;
  };
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector acc(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t ahead = 0;
      const double dj = sq(i, j);
      for (std::size_t l = 0; l < n; ++l) {
        const double dl = sq(i, l);
        if (dl < dj || (dl == dj && l < j)) ++ahead;
      }
      if (ahead < keep) {
        for (std::size_t k = 0; k < d; ++k) acc[k] += vectors[j][k];
      }
    }
    for (double& v : acc) v /= static_cast<double>(keep);
    out.push_back(std::move(acc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model oracles.

/// Direct evaluation of (1/m) sum log(1 + exp(-b a.x)) + lambda ||x||^2.
inline double naive_loss(const LogRegProblem& p, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double z = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) z += p.shard.row(j)[k] * x[k];
    s += std::log(1.0 + std::exp(-p.shard.label(j) * z));
  }
  double r = 0.0;
  for (double v : x) r += v * v;
  return s / static_cast<double>(p.size()) + p.lambda * r;
}

/// Single-sample objective f(x, xi_j).
inline double sample_loss(const LogRegProblem& p, std::span<const double> x, std::size_t j) {
  double z = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) z += p.shard.row(j)[k] * x[k];
  double r = 0.0;
  for (double v : x) r += v * v;
  return std::log1p(std::exp(-p.shard.label(j) * z)) + p.lambda * r;
}

/// Central finite-difference gradient of f(., xi_j).
inline Vector fd_sample_grad(const LogRegProblem& p, std::span<const double> x, std::size_t j,
                             double h = 1e-6) {
  Vector g(x.size());
  Vector probe(x.begin(), x.end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = sample_loss(p, probe, j);
    probe[k] = x[k] - h;
    const double down = sample_loss(p, probe, j);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    num += (got[k] - want[k]) * (got[k] - want[k]);
    den += want[k] * want[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// ---------------------------------------------------------------------------
// The oracle suite driven by `byzsim verify` and the acceptance binary.

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline CheckResult timed(const std::string& name, double limit_seconds,
                         const std::function<bool(std::string&)>& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  r.pass = body(r.detail);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds >= limit_seconds) {
    r.pass = false;
    r.detail += " [runtime " + fmt(r.seconds) + " s exceeds " + fmt(limit_seconds) + " s]";
  }
  return r;
}

inline Vector gaussian_vector(RngStream& rng, std::size_t d, double scale = 1.0) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline Dataset random_dataset(RngStream& rng, std::size_t m, std::size_t d) {
  std::vector<double> f(m * d);
  std::vector<int> l(m);
  for (double& x : f) x = rng.normal();
  for (int& b : l) b = rng.uniform01() < 0.5 ? -1 : 1;
  return Dataset(d, std::move(f), std::move(l));
}

}  // namespace detail

/// Empirical var_u / var_v and var_v against the closed forms at
/// eta in {0.1, 0.3, 0.5}, sigma = 1, horizon 1e6; 5% relative tolerance.
inline CheckResult check_momentum_variance(std::uint64_t seed = 2024) {
  return detail::timed("momentum variance ratio", 10.0, [&](std::string& out) {
    bool ok = true;
    for (double eta : {0.1, 0.3, 0.5}) {
      const auto st = mc_momentum_chains(eta, 1.0, 1'000'000, seed);
      const double ratio_th = variance_ratio_theory(eta);
      const double v_th = single_momentum_var_theory(eta);
      const double ratio_err = std::abs(st.ratio() / ratio_th - 1.0);
      const double v_err = std::abs(st.var_v / v_th - 1.0);
      ok = ok && ratio_err <= 0.05 && v_err <= 0.05;
      out += "eta=" + detail::fmt(eta) + ": ratio " + detail::fmt(st.ratio()) + " vs " +
             detail::fmt(ratio_th) + ", var_v " + detail::fmt(st.var_v) + " vs " +
             detail::fmt(v_th) + "; ";
    }
    return ok;
  });
}

/// Top-k contraction holds exactly on 1e3 vectors (d = 123, k = 12); Rand-k's
/// mean residual ratio over 1e4 draws is within 2% of 1 - k/d.
inline CheckResult check_contraction(std::uint64_t seed = 2024) {
  return detail::timed("compressor contraction", 5.0, [&](std::string& out) {
    constexpr std::size_t d = 123;
    constexpr std::size_t k = 12;
    const double bound = 1.0 - static_cast<double>(k) / d;
    RngStream rng = derive_stream(seed, kServerStream, 1, Purpose::MonteCarlo);
    RngStream unused = derive_stream(seed, kServerStream, 2, Purpose::MonteCarlo);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = detail::gaussian_vector(rng, d, 1.0 + trial % 7);
      const Vector cx = densify(compress(CompressorSpec::top_k(k), x, unused));
      if (dist_sq(cx, x) > bound * norm_sq(x)) ++violations;
    }
    bool ok = violations == 0;
    out += "top-k violations " + std::to_string(violations) + "/1000; rand-k mean ratio";
    RngStream draws = derive_stream(seed, kServerStream, 3, Purpose::MonteCarlo);
    for (int vec = 0; vec < 3; ++vec) {
      const Vector x = detail::gaussian_vector(rng, d);
      const double nx = norm_sq(x);
      double acc = 0.0;
      for (int t = 0; t < 10000; ++t) {
        const Vector cx = densify(compress(CompressorSpec::rand_k(k), x, draws));
        acc += dist_sq(cx, x) / nx;
      }
      const double mean_ratio = acc / 10000.0;
      ok = ok && std::abs(mean_ratio / bound - 1.0) <= 0.02;
      out += " " + detail::fmt(mean_ratio);
    }
    out += " (target " + detail::fmt(bound) + ")";
    return ok;
  });
}

/// CWTM and NNM against brute-force oracles on 1e3 random instances
/// (n <= 9, d <= 5), bit-exact; 8-step RFA objective within 0.1% of the
/// long-run oracle on 100 random 10-point planar instances.
inline CheckResult check_aggregator_oracles(std::uint64_t seed = 2024) {
  return detail::timed("aggregator oracles", 10.0, [&](std::string& out) {
    RngStream rng = derive_stream(seed, kServerStream, 4, Purpose::MonteCarlo);
    std::size_t cwtm_bad = 0, nnm_bad = 0;
    for (int inst = 0; inst < 1000; ++inst) {
      const std::size_t n = 1 + rng.uniform_index(9);
      const std::size_t d = 1 + rng.uniform_index(5);
      const std::size_t b = rng.uniform_index((n - 1) / 2 + 1);  // 2b < n
      std::vector<Vector> vs;
      for (std::size_t i = 0; i < n; ++i) {
        // Rounded values force ties in both distance and coordinate order.
        Vector v(d);
        for (double& x : v) x = inst % 3 == 0 ? std::round(2.0 * rng.normal()) : rng.normal();
        vs.push_back(std::move(v));
      }
      if (cwtm(vs, b) != cwtm_oracle(vs, b)) ++cwtm_bad;
      if (nnm(vs, b) != nnm_oracle(vs, b)) ++nnm_bad;
    }
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
      std::vector<Vector> pts;
      for (int i = 0; i < 10; ++i) pts.push_back(detail::gaussian_vector(rng, 2));
      const double fast = geomedian_objective(rfa(pts, 8, 1e-6), pts);
      const double best = geomedian_objective(geomedian_oracle(pts), pts);
      worst = std::max(worst, fast / best - 1.0);
    }
    out = "cwtm mismatches " + std::to_string(cwtm_bad) + "/1000, nnm mismatches " +
          std::to_string(nnm_bad) + "/1000, worst rfa(8) excess " + detail::fmt(100.0 * worst) + "%";
    return cwtm_bad == 0 && nnm_bad == 0 && worst <= 1e-3;
  });
}

/// Stochastic gradients against central differences (relative error < 1e-5,
/// 100 probes) and full_grad against the mean of stochastic gradients (1e-12).
inline CheckResult check_gradients(std::uint64_t seed = 2024) {
  return detail::timed("gradient correctness", 10.0, [&](std::string& out) {
    RngStream rng = derive_stream(seed, kServerStream, 5, Purpose::MonteCarlo);
    double worst_fd = 0.0;
    double worst_mean = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      const std::size_t m = 5 + rng.uniform_index(20);
      const std::size_t d = 1 + rng.uniform_index(8);
      LogRegProblem p(detail::random_dataset(rng, m, d), 0.01 + rng.uniform01());
      const Vector x = detail::gaussian_vector(rng, d, 0.5);
      const std::size_t j = rng.uniform_index(m);
      worst_fd = std::max(worst_fd, relative_error(stoch_grad(p, x, j), fd_sample_grad(p, x, j)));

      Vector acc(d, 0.0);
      for (std::size_t s = 0; s < m; ++s) add_into(stoch_grad(p, x, s), acc);
      for (double& a : acc) a /= static_cast<double>(m);
      const Vector full = full_grad(p, x);
      for (std::size_t k = 0; k < d; ++k) worst_mean = std::max(worst_mean, std::abs(full[k] - acc[k]));
    }
    out = "worst finite-difference rel. error " + detail::fmt(worst_fd) +
          ", worst |full_grad - mean stoch_grad| " + detail::fmt(worst_mean);
    return worst_fd < 1e-5 && worst_mean <= 1e-12;
  });
}

inline std::vector<CheckResult> run_suite(std::uint64_t seed = 2024) {
  return {check_momentum_variance(seed), check_contraction(seed), check_aggregator_oracles(seed),
          check_gradients(seed)};
}

inline void print_result(std::ostream& out, const CheckResult& r) {
  out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " (" << detail::fmt(r.seconds)
      << " s): " << r.detail << '\n';
}

}  // namespace byzsim::verify
