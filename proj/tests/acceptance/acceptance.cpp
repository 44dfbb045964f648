// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks, one result line per criterion:
//   acceptance [N ...]      run the listed criteria (default: all)
// Exit status is 0 when every selected criterion passes or is skipped.
// Criterion 8 needs the a9a training file; point BYZSIM_A9A at it.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "byzsim/byzsim.hpp"
#include "byzsim/verify.hpp"

using namespace byzsim;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

Outcome from_check(const verify::CheckResult& r) {
  return {r.pass ? Status::Pass : Status::Fail, r.detail + " [" + num(r.seconds) + " s]"};
}

// Desk-scale robustness setting shared by criteria 6, 7 and 9.
const Dataset& desk_data() {
  static const Dataset data = [] {
    DataSource src;
    src.synth_m = 4000;
    src.synth_d = 50;
    src.synth_separation = 1.0;
    return synthetic_dataset(src);
  }();
  return data;
}

RunConfig desk_config(AttackSpec::Kind attack, AggregatorSpec agg, AlgoVariant variant,
                      std::uint64_t seed) {
  RunConfig c;
  c.variant = variant;
  c.n = 20;
  c.byzantine = 8;
  c.compressor = CompressorSpec::top_k(5);
  c.eta = 0.1;
  c.gamma = 0.05;
  c.rounds = 3000;
  c.partition = PartitionScheme::LabelSorted;
  c.aggregator = agg;
  c.attack.kind = attack;
  c.seed = seed;
  return c;
}

AggregatorSpec cm_nnm() { return AggregatorSpec::cm().with_nnm(8); }

struct NamedRun {
  std::string name;
  RunConfig config;
};

std::vector<NamedRun> desk_runs() {
  std::vector<NamedRun> runs;
  const std::pair<const char*, AttackSpec::Kind> attacks[] = {
      {"none", AttackSpec::Kind::None}, {"sf", AttackSpec::Kind::SignFlip},
      {"lf", AttackSpec::Kind::LabelFlip}, {"ipm", AttackSpec::Kind::IPM},
      {"alie", AttackSpec::Kind::ALIE}};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const auto& [name, kind] : attacks) {
      runs.push_back({std::string("cmnnm_") + name + "_s" + std::to_string(seed),
                      desk_config(kind, cm_nnm(), AlgoVariant::DM21, seed)});
    }
    runs.push_back({"mean_sf_s" + std::to_string(seed),
                    desk_config(AttackSpec::Kind::SignFlip, AggregatorSpec::mean(), AlgoVariant::DM21, seed)});
    runs.push_back({"vr_none_s" + std::to_string(seed),
                    desk_config(AttackSpec::Kind::None, cm_nnm(), AlgoVariant::VRDM21, seed)});
  }
  return runs;
}

double record_at(const MetricsSeries& s, std::size_t t, double RoundRecord::*field) {
  for (const auto& r : s.records) {
    if (r.t == t) return r.*field;
  }
  throw std::runtime_error("round " + std::to_string(t) + " not recorded");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome criterion5() {
  const std::size_t n = 10;
  const std::uint64_t seed = 7;
  const double gamma = 0.05;
  DataSource src;
  src.synth_m = 1000;
  src.synth_d = 20;
  const Dataset data = synthetic_dataset(src);

  RunConfig c;
  c.n = n;
  c.byzantine = 0;
  c.eta = 1.0;
  c.gamma = gamma;
  c.compressor = CompressorSpec::identity();
  c.aggregator = AggregatorSpec::mean();
  c.seed = seed;
  c.rounds = 100;

  RngStream part = derive_stream(seed, kServerStream, 0, Purpose::Partition);
  const auto shards = partition(data, n, c.partition, part);
  ThreadPool pool(1);
  SimState s = init(c, shards, &pool);

  // Textbook minibatch-of-one SGD on the same shards and sample draws.
  std::vector<LogRegProblem> problems;
  for (const auto& sh : shards) problems.push_back(LogRegProblem::with_default_lambda(sh));
  const std::size_t d = data.dim();
  auto sgd_direction = [&](const Vector& x, std::uint32_t round, Purpose purpose) {
    Vector sum(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = derive_stream(seed, static_cast<std::uint32_t>(i), round, purpose);
      const auto j = static_cast<std::size_t>(rng.uniform_index(problems[i].size()));
      const Vector g = stoch_grad(problems[i], x, j);
      for (std::size_t k = 0; k < d; ++k) sum[k] += g[k];
    }
    for (double& v : sum) v /= static_cast<double>(n);
    return sum;
  };
  Vector x(d, 0.0);
  Vector g = sgd_direction(x, 0, Purpose::Init);
  for (std::uint32_t t = 0; t < 100; ++t) {
    for (std::size_t k = 0; k < d; ++k) x[k] = x[k] - gamma * g[k];
    g = sgd_direction(x, t + 1, Purpose::Sample);
    advance(s, c, pool);
    const bool same = std::memcmp(x.data(), s.server.x.data(), d * sizeof(double)) == 0 &&
                      std::memcmp(g.data(), s.server.g_global.data(), d * sizeof(double)) == 0;
    if (!same) {
      return {Status::Fail, "trajectories diverge at round " + std::to_string(t + 1)};
    }
  }
  return {Status::Pass, "100 rounds bit-identical to reference SGD (n=10, d=20)"};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<const char*, AttackSpec::Kind> attacks[] = {
      {"SF", AttackSpec::Kind::SignFlip}, {"LF", AttackSpec::Kind::LabelFlip},
      {"IPM", AttackSpec::Kind::IPM}, {"ALIE", AttackSpec::Kind::ALIE}};
  auto mean_final_loss = [](AttackSpec::Kind kind, const AggregatorSpec& agg) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      RunConfig c = desk_config(kind, agg, AlgoVariant::DM21, seed);
      c.record_every = c.rounds;
      total += run(c, desk_data()).records.back().loss;
    }
    return total / 3.0;
  };
  const double base = mean_final_loss(AttackSpec::Kind::None, cm_nnm());
  bool ok = true;
  std::string detail = "NoAttack CM-NNM loss " + num(base) + ";";
  for (const auto& [name, kind] : attacks) {
    const double ratio = mean_final_loss(kind, cm_nnm()) / base;
    ok = ok && ratio <= 1.5;
    detail += std::string(" ") + name + " ratio " + num(ratio) + (ratio <= 1.5 ? "" : " (>1.5)") + ";";
  }
  const double mean_sf = mean_final_loss(AttackSpec::Kind::SignFlip, AggregatorSpec::mean()) / base;
  ok = ok && mean_sf >= 5.0;
  detail += " Mean under SF ratio " + num(mean_sf) + (mean_sf >= 5.0 ? "" : " (<5)") + ";";
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  detail += " " + num(secs) + " s";
  return {ok ? Status::Pass : Status::Fail, detail};
}

Outcome criterion7() {
  double vr100 = 0.0, vr3000 = 0.0, dm3000 = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RunConfig vr = desk_config(AttackSpec::Kind::None, cm_nnm(), AlgoVariant::VRDM21, seed);
    vr.record_every = 100;
    const auto vs = run(vr, desk_data());
    vr100 += record_at(vs, 100, &RoundRecord::momentum_dev) / 3.0;
    vr3000 += record_at(vs, 3000, &RoundRecord::momentum_dev) / 3.0;
    RunConfig dm = desk_config(AttackSpec::Kind::None, cm_nnm(), AlgoVariant::DM21, seed);
    dm.record_every = 100;
    dm3000 += record_at(run(dm, desk_data()), 3000, &RoundRecord::momentum_dev) / 3.0;
  }
  const double decay = vr3000 / vr100;
  const double vs_dm = vr3000 / dm3000;
  const bool ok = decay <= 0.1 && vs_dm <= 0.5;
  return {ok ? Status::Pass : Status::Fail,
          "VR momentum_dev t=100 " + num(vr100) + ", t=3000 " + num(vr3000) + " (ratio " +
              num(decay) + ", need <= 0.1); DM21 t=3000 " + num(dm3000) + " (VR/DM21 " +
              num(vs_dm) + ", need <= 0.5)"};
}

Outcome criterion8() {
  const char* path = std::getenv("BYZSIM_A9A");
  if (!path || !*path) return {Status::Skip, "BYZSIM_A9A not set"};
  std::ifstream in(path);
  if (!in) return {Status::Skip, std::string("cannot open ") + path};
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t d = infer_libsvm_dim(in);
  const Dataset data = parse_libsvm(in, d);
  std::string detail = "m=" + std::to_string(data.size()) + " d=" + std::to_string(d) + ";";
  bool ok = data.size() == 32561 && d == 123;

  RunConfig c;
  c.variant = AlgoVariant::DM21;
  c.aggregator = cm_nnm();
  c.attack.kind = AttackSpec::Kind::SignFlip;
  c.compressor = CompressorSpec::top_k(default_k(d));
  const std::size_t local_m = (data.size() + c.n - 1) / c.n;
  c.rounds = 40 * local_m;
  c.record_every = c.rounds / 200;
  c.threads = threads_from_env();
  const auto series = run(c, data);
  const double first = series.records.front().loss;
  const double last = series.records.back().loss;
  // Trend: means over ten consecutive blocks of records do not rise by more
  // than 1% of the starting loss (plateau noise).
  const std::size_t blocks = 10;
  const std::size_t per = series.records.size() / blocks;
  std::vector<double> block_mean(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t j = 0; j < per; ++j) block_mean[b] += series.records[b * per + j].loss / per;
  }
  bool trend = true;
  for (std::size_t b = 1; b < blocks; ++b) trend = trend && block_mean[b] <= block_mean[b - 1] + 0.01 * first;
  const double secs = seconds_since(t0);
  ok = ok && std::abs(first - std::log(2.0)) < 1e-9 && last < 0.55 && trend && secs < 300.0;
  detail += " T=" + std::to_string(c.rounds) + " loss " + num(first) + " -> " + num(last) +
            (trend ? ", downward trend" : ", trend rises") + "; " + num(secs) + " s";
  return {ok ? Status::Pass : Status::Fail, detail};
}

std::string csv_of(const RunConfig& c, const Dataset& data) {
  std::ostringstream o;
  emit_csv(run(c, data), o);
  return o.str();
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  auto with_threads = [](const char* threads) {
    setenv("BYZSIM_THREADS", threads, 1);
    return threads_from_env();
  };
  std::size_t compared = 0;
  std::string mismatch;
  for (const auto& r : desk_runs()) {
    RunConfig c = r.config;
    c.threads = with_threads("1");
    const std::string a = csv_of(c, desk_data());
    const std::string b = csv_of(c, desk_data());
    c.threads = with_threads("8");
    const std::string e = csv_of(c, desk_data());
    ++compared;
    if (a != b || a != e) {
      mismatch = r.name;
      break;
    }
  }
  if (mismatch.empty()) {
    // The SGD-collapse configuration as well.
    DataSource src;
    src.synth_m = 1000;
    src.synth_d = 20;
    const Dataset data = synthetic_dataset(src);
    RunConfig c;
    c.n = 10;
    c.byzantine = 0;
    c.eta = 1.0;
    c.compressor = CompressorSpec::identity();
    c.aggregator = AggregatorSpec::mean();
    c.seed = 7;
    c.rounds = 100;
    c.threads = with_threads("1");
    const std::string a = csv_of(c, data);
    c.threads = with_threads("8");
    if (a != csv_of(c, data)) mismatch = "sgd_collapse";
    ++compared;
  }
  unsetenv("BYZSIM_THREADS");
  if (!mismatch.empty()) return {Status::Fail, "CSV differs for " + mismatch};
  return {Status::Pass, std::to_string(compared) +
                            " configurations byte-identical across reruns and BYZSIM_THREADS=1/8 (" +
                            num(seconds_since(t0)) + " s)"};
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> table = {
      {1, {"momentum variance ratio", [] { return from_check(verify::check_momentum_variance()); }}},
      {2, {"compressor contraction", [] { return from_check(verify::check_contraction()); }}},
      {3, {"aggregator oracles", [] { return from_check(verify::check_aggregator_oracles()); }}},
      {4, {"gradient correctness", [] { return from_check(verify::check_gradients()); }}},
      {5, {"SGD collapse", criterion5}},
      {6, {"desk-scale robustness", criterion6}},
      {7, {"variance reduction", criterion7}},
      {8, {"a9a reproduction", criterion8}},
      {9, {"determinism", criterion9}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, _] : criteria()) selected.push_back(id);
  }
  int failures = 0;
  for (int id : selected) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "[PASS]" : o.status == Status::Fail ? "[FAIL]" : "[SKIP]";
    std::cout << tag << " criterion " << id << " (" << it->second.first << "): " << o.detail << std::endl;
    if (o.status == Status::Fail) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
