// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Byzantine-robust double-momentum training with error-feedback compression.
//
// One round, for every honest worker i:
//   x'   = x - gamma g                                    (server)
//   v_i <- (1-eta) v_i + eta grad f_i(x', xi)             (DM21)
//   v_i <- grad f_i(x', xi) + (1-eta)(v_i - grad f_i(x, xi))   (VR-DM21, shared xi)
//   u_i <- (1-eta) u_i + eta v_i                          (EF21-SGDM: u_i <- v_i)
//   c_i  = C(u_i - g_i),  g_i <- g_i + c_i
// then g = F({g_1, ..., g_n}) on the server. Byzantine slots are the last B
// worker ids; they still run the protocol on their own shard so that the
// attack sees the message they would have sent.
//
// The shared state g_i is synchronised by value: the uplink lists, for each
// coordinate retained by C, the new value of g_i (= u_i there), so the
// server mirror and the worker agree bit for bit. For honest workers this is
// the same update as g_i + c_i.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "byzsim/aggregate.hpp"
#include "byzsim/attack.hpp"
#include "byzsim/compress.hpp"
#include "byzsim/core.hpp"
#include "byzsim/data.hpp"
#include "byzsim/error.hpp"
#include "byzsim/metrics.hpp"
#include "byzsim/model.hpp"
#include "byzsim/parallel.hpp"
#include "byzsim/rng.hpp"

namespace byzsim {

enum class AlgoVariant { DM21, VRDM21, EF21SGDM };

/// Which honest vectors msg_variance measures.
enum class VarianceSource { Momentum, Wire, Both };

struct RunConfig {
  AlgoVariant variant = AlgoVariant::DM21;
  double gamma = 0.05;
  double eta = 0.1;
  std::size_t rounds = 1000;
  std::size_t n = 20;
  std::size_t byzantine = 8;
  CompressorSpec compressor;
  AggregatorSpec aggregator;
  AttackSpec attack;
  std::uint64_t seed = 1;
  std::size_t init_batch = 1;
  std::size_t batch = 1;
  std::optional<double> lambda;  // unset: 1 / local sample count per worker
  PartitionScheme partition = PartitionScheme::IidUniform;
  std::size_t record_every = 1;
  VarianceSource variance_source = VarianceSource::Momentum;
  std::size_t threads = 1;

  std::size_t honest() const noexcept { return n - byzantine; }
  bool is_byzantine(std::size_t worker) const noexcept { return worker >= honest(); }

  /// gamma = 0 is accepted here (frozen model); the experiment parser
  /// requires gamma > 0.
  void validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
    if (rounds < 1) throw ConfigError("T must be >= 1");
    if (n < 1) throw ConfigError("n must be >= 1");
    if (2 * byzantine >= n) throw ConfigError("B must be below n/2");
    if (n > kMaxWorkerId) throw ConfigError("too many workers");
    if (init_batch < 1 || batch < 1) throw ConfigError("batch sizes must be >= 1");
    if (record_every < 1) throw ConfigError("record_every must be >= 1");
    if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    aggregator.validate(n);
    attack.validate();
  }
};

struct WorkerState {
  Vector v;        // first momentum
  Vector u;        // second momentum
  Vector g_local;  // error-feedback state, mirrored on the server
  LogRegProblem problem;
};

struct ServerState {
  Vector x;
  Vector g_global;
  std::vector<Vector> g_table;
  std::size_t round = 0;
};

struct SimState {
  ServerState server;
  std::vector<WorkerState> workers;       // all n slots; Byzantine ones are reference pipelines
  std::vector<SparseMessage> last_honest; // honest c_i of the latest round (dense at round 0)
  std::uint64_t bytes_up = 0;
};

/// `count` distinct indices below m, uniformly without replacement, sorted.
/// count == 1 is a single uniform draw.
inline std::vector<std::size_t> sample_indices(RngStream& rng, std::size_t m, std::size_t count) {
  if (count == 0 || count > m) throw ConfigError("batch size must lie in [1, shard size]");
  if (count == 1) return {static_cast<std::size_t>(rng.uniform_index(m))};
  if (count == m) {
    std::vector<std::size_t> all(m);
    for (std::size_t j = 0; j < m; ++j) all[j] = j;
    return all;
  }
  // Floyd's algorithm.
  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t j = m - count; j < m; ++j) {
    const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

/// One worker's round: momentum updates, compression of u - g, local state
/// update. Returns the compressed difference c.
inline SparseMessage honest_step(WorkerState& w, std::span<const double> x_new,
                                 std::span<const double> x_old, const RunConfig& config,
                                 RngStream& rng) {
  const std::size_t d = x_new.size();
  require_same_dim(x_old.size(), d, "honest_step");
  require_same_dim(w.v.size(), d, "honest_step");
  const double eta = config.eta;
  const double keep = 1.0 - eta;
  const auto idx = sample_indices(rng, w.problem.size(), std::min(config.batch, w.problem.size()));

  if (config.variant == AlgoVariant::VRDM21) {
    const auto [g_new, g_old] = batch_grad_pair(w.problem, x_new, x_old, idx);
    for (std::size_t k = 0; k < d; ++k) w.v[k] = g_new[k] + keep * (w.v[k] - g_old[k]);
  } else {
    const Vector g_new = batch_grad(w.problem, x_new, idx);
    for (std::size_t k = 0; k < d; ++k) w.v[k] = keep * w.v[k] + eta * g_new[k];
  }
  if (config.variant == AlgoVariant::EF21SGDM) {
    w.u = w.v;
  } else {
    for (std::size_t k = 0; k < d; ++k) w.u[k] = keep * w.u[k] + eta * w.v[k];
  }

  const Vector diff = sub(w.u, w.g_local);
  SparseMessage c = compress(config.compressor, diff, rng);
  for (const auto& e : c.entries) w.g_local[e.index] = w.u[e.index];
  return c;
}

namespace detail {

/// Metrics at the current state. Reads honest slots only.
inline RoundRecord measure(const SimState& s, const RunConfig& config, ThreadPool& pool) {
  const std::size_t g_count = config.honest();
  std::vector<double> losses(g_count);
  std::vector<Vector> grads(g_count);
  pool.parallel_for(g_count, [&](std::size_t i) {
    auto [l, g] = loss_and_grad(s.workers[i].problem, s.server.x);
    losses[i] = l;
    grads[i] = std::move(g);
  });

  RoundRecord r;
  r.t = s.server.round;
  double loss_sum = 0.0;
  for (double l : losses) loss_sum += l;
  r.loss = loss_sum / static_cast<double>(g_count);
  const Vector grad_f = mean_of(grads);
  r.grad_norm_sq = norm_sq(grad_f);

  double het = 0.0;
  double dev = 0.0;
  std::vector<Vector> momenta;
  momenta.reserve(g_count);
  for (std::size_t i = 0; i < g_count; ++i) {
    het += dist_sq(grads[i], grad_f);
    dev += dist_sq(s.workers[i].v, grads[i]);
    momenta.push_back(s.workers[i].v);
  }
  r.het_hat = het / static_cast<double>(g_count);
  r.momentum_dev = dev / static_cast<double>(g_count);

  auto wire_variance = [&] {
    std::vector<Vector> wire;
    wire.reserve(g_count);
    for (const auto& c : s.last_honest) wire.push_back(densify(c));
    return honest_variance(wire);
  };
  switch (config.variance_source) {
    case VarianceSource::Momentum:
      r.msg_variance = honest_variance(momenta);
      break;
    case VarianceSource::Wire:
      r.msg_variance = wire_variance();
      break;
    case VarianceSource::Both:
      r.msg_variance = honest_variance(momenta);
      r.wire_variance = wire_variance();
      break;
  }
  r.bytes_up = s.bytes_up;
  r.kappa_hat = kappa_ratio(
      s.server.g_global,
      std::span<const Vector>(s.server.g_table.data(), g_count));
  return r;
}

/// SF, IPM and ALIE replace the protocol message; None and LF send it (LF on
/// poisoned data), so those slots are mirrored exactly like honest ones.
inline bool forges_messages(const AttackSpec& a) {
  return a.kind != AttackSpec::Kind::None && a.kind != AttackSpec::Kind::LabelFlip;
}

/// Forged messages are dense and added to the slot's mirror.
inline void apply_byzantine(SimState& s, const RunConfig& config,
                            const std::vector<Vector>& honest_msgs,
                            std::vector<Vector> reference_msgs) {
  const std::size_t b_count = config.byzantine;
  if (b_count == 0 || !forges_messages(config.attack)) return;
  const std::size_t d = s.server.x.size();
  AttackContext ctx{honest_msgs, std::move(reference_msgs)};
  const auto byz = byz_messages(config.attack, ctx, b_count);
  for (std::size_t b = 0; b < b_count; ++b) {
    add_into(byz[b], s.server.g_table[config.honest() + b]);
    s.bytes_up += d * (SparseMessage::kIndexBytes + SparseMessage::kValueBytes);
  }
}

}  // namespace detail

/// Builds per-worker problems (label-flipped for Byzantine slots under LF)
/// and runs the initialization round: v = u = g_i = batch gradient at x = 0,
/// every worker sends g_i, and g = F(g_1, ..., g_n).
inline SimState init(const RunConfig& config, std::vector<Dataset> shards,
                     ThreadPool* pool = nullptr) {
  config.validate();
  if (shards.size() != config.n) {
    throw ConfigError("expected " + std::to_string(config.n) + " shards, got " +
                      std::to_string(shards.size()));
  }
  const std::size_t d = shards.front().dim();
  config.compressor.validate(d);
  ThreadPool local(1);
  ThreadPool& exec = pool ? *pool : local;

  SimState s;
  s.workers.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    require_same_dim(shards[i].dim(), d, "shard dimension");
    Dataset shard = std::move(shards[i]);
    if (config.is_byzantine(i) && config.attack.kind == AttackSpec::Kind::LabelFlip) {
      shard = poison_labels(shard);
    }
    s.workers[i].problem = config.lambda ? LogRegProblem(std::move(shard), *config.lambda)
                                         : LogRegProblem::with_default_lambda(std::move(shard));
  }

  s.server.x = zeros(d);
  exec.parallel_for(config.n, [&](std::size_t i) {
    auto& w = s.workers[i];
    RngStream rng = derive_stream(config.seed, static_cast<std::uint32_t>(i), 0, Purpose::Init);
    const auto idx = sample_indices(rng, w.problem.size(), std::min(config.init_batch, w.problem.size()));
    w.v = batch_grad(w.problem, s.server.x, idx);
    w.u = w.v;
    w.g_local = w.v;
  });

  s.server.g_table.assign(config.n, zeros(d));
  std::vector<Vector> honest_msgs;
  std::vector<Vector> reference;
  const bool follows_protocol = !detail::forges_messages(config.attack);
  for (std::size_t i = 0; i < config.n; ++i) {
    const bool byz = config.is_byzantine(i);
    if (byz && !follows_protocol) {
      reference.push_back(s.workers[i].g_local);
      continue;
    }
    s.server.g_table[i] = s.workers[i].g_local;
    s.bytes_up += SparseMessage::dense(s.workers[i].g_local).byte_cost();
    if (byz) continue;
    honest_msgs.push_back(s.workers[i].g_local);
    s.last_honest.push_back(SparseMessage::dense(s.workers[i].g_local));
  }
  detail::apply_byzantine(s, config, honest_msgs, std::move(reference));
  s.server.g_global = aggregate(config.aggregator, s.server.g_table);
  s.server.round = 0;
  return s;
}

/// Advances one round: broadcast, worker steps, attack, server update.
inline void advance(SimState& s, const RunConfig& config, ThreadPool& pool) {
  const std::size_t d = s.server.x.size();
  const Vector x_old = s.server.x;
  Vector x_new(d);
  for (std::size_t k = 0; k < d; ++k) x_new[k] = x_old[k] - config.gamma * s.server.g_global[k];
  const auto next_round = static_cast<std::uint32_t>(s.server.round + 1);

  std::vector<SparseMessage> msgs(config.n);
  pool.parallel_for(config.n, [&](std::size_t i) {
    RngStream rng = derive_stream(config.seed, static_cast<std::uint32_t>(i), next_round,
                                  Purpose::Sample);
    msgs[i] = honest_step(s.workers[i], x_new, x_old, config, rng);
  });

  const bool follows_protocol = !detail::forges_messages(config.attack);
  std::vector<Vector> honest_msgs;
  std::vector<Vector> reference;
  honest_msgs.reserve(config.honest());
  s.last_honest.clear();
  for (std::size_t i = 0; i < config.n; ++i) {
    const bool byz = config.is_byzantine(i);
    if (byz && !follows_protocol) {
      reference.push_back(densify(msgs[i]));
      continue;
    }
    auto& mirror = s.server.g_table[i];
    for (const auto& e : msgs[i].entries) mirror[e.index] = s.workers[i].g_local[e.index];
    s.bytes_up += msgs[i].byte_cost();
    if (byz) continue;
    honest_msgs.push_back(densify(msgs[i]));
    s.last_honest.push_back(std::move(msgs[i]));
  }
  detail::apply_byzantine(s, config, honest_msgs, std::move(reference));
  s.server.g_global = aggregate(config.aggregator, s.server.g_table);
  s.server.x = std::move(x_new);
  s.server.round = next_round;
}

inline RoundRecord measure(const SimState& s, const RunConfig& config, ThreadPool& pool) {
  return detail::measure(s, config, pool);
}

inline RoundRecord round(SimState& s, const RunConfig& config, ThreadPool& pool) {
  advance(s, config, pool);
  return detail::measure(s, config, pool);
}

/// Full-objective gradient norm at x over the honest workers' problems.
inline double honest_grad_norm_sq(const SimState& s, const RunConfig& config,
                                  std::span<const double> x) {
  std::vector<Vector> grads;
  for (std::size_t i = 0; i < config.honest(); ++i) grads.push_back(full_grad(s.workers[i].problem, x));
  return norm_sq(mean_of(grads));
}

/// init + T rounds on pre-partitioned shards. Records rounds that are
/// multiples of record_every, plus round 0 and round T. Also reports the
/// gradient norm at an iterate drawn uniformly from x_0 .. x_{T-1}.
inline MetricsSeries run_shards(const RunConfig& config, std::vector<Dataset> shards) {
  ThreadPool pool(config.threads);
  SimState s = init(config, std::move(shards), &pool);
  MetricsSeries series;
  RngStream pick = derive_stream(config.seed, kServerStream, 0, Purpose::IterateSelect);
  series.xhat_round = static_cast<std::size_t>(pick.uniform_index(config.rounds));
  Vector xhat;

  series.records.push_back(measure(s, config, pool));
  for (std::size_t t = 0; t < config.rounds; ++t) {
    if (t == series.xhat_round) xhat = s.server.x;
    advance(s, config, pool);
    const std::size_t now = t + 1;
    if (now % config.record_every == 0 || now == config.rounds) {
      series.records.push_back(measure(s, config, pool));
    }
  }
  series.xhat_grad_norm_sq = honest_grad_norm_sq(s, config, xhat);
  return series;
}

/// Partitions the dataset (stream lineage: server, round 0, Partition) and runs.
inline MetricsSeries run(const RunConfig& config, const Dataset& data) {
  config.validate();
  RngStream rng = derive_stream(config.seed, kServerStream, 0, Purpose::Partition);
  return run_shards(config, partition(data, config.n, config.partition, rng));
}

}  // namespace byzsim
