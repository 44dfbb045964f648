// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Seed (and step-size) sweeps: one metrics CSV per run plus a mean/stderr
// companion per step size.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "byzsim/config.hpp"
#include "byzsim/data.hpp"
#include "byzsim/engine.hpp"
#include "byzsim/error.hpp"
#include "byzsim/metrics.hpp"

namespace byzsim {

namespace detail {

inline const char* variant_name(AlgoVariant v) {
  switch (v) {
    case AlgoVariant::DM21: return "dm21";
    case AlgoVariant::VRDM21: return "vrdm21";
    case AlgoVariant::EF21SGDM: return "ef21sgdm";
  }
  return "?";
}

inline const char* compressor_name(CompressorSpec::Kind k) {
  switch (k) {
    case CompressorSpec::Kind::Identity: return "identity";
    case CompressorSpec::Kind::TopK: return "topk";
    case CompressorSpec::Kind::RandK: return "randk";
  }
  return "?";
}

inline const char* aggregator_name(AggregatorSpec::Base b) {
  switch (b) {
    case AggregatorSpec::Base::Mean: return "mean";
    case AggregatorSpec::Base::CM: return "cm";
    case AggregatorSpec::Base::CWTM: return "cwtm";
    case AggregatorSpec::Base::RFA: return "rfa";
  }
  return "?";
}

inline const char* attack_name(AttackSpec::Kind k) {
  switch (k) {
    case AttackSpec::Kind::None: return "none";
    case AttackSpec::Kind::SignFlip: return "sf";
    case AttackSpec::Kind::LabelFlip: return "lf";
    case AttackSpec::Kind::IPM: return "ipm";
    case AttackSpec::Kind::ALIE: return "alie";
  }
  return "?";
}

/// Shortest %g form that reads back to the same double.
inline std::string short_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

/// Canonical key=value form of a run configuration (one key per line).
inline std::string echo_config(const RunConfig& r) {
  std::ostringstream o;
  o << "variant=" << detail::variant_name(r.variant) << '\n'
    << "gamma=" << detail::short_double(r.gamma) << '\n'
    << "eta=" << detail::short_double(r.eta) << '\n'
    << "T=" << r.rounds << '\n'
    << "n=" << r.n << '\n'
    << "B=" << r.byzantine << '\n'
    << "seed=" << r.seed << '\n'
    << "init_batch=" << r.init_batch << '\n'
    << "batch=" << r.batch << '\n'
    << "lambda=" << (r.lambda ? detail::short_double(*r.lambda) : "auto") << '\n'
    << "compressor=" << detail::compressor_name(r.compressor.kind) << '\n';
  if (r.compressor.kind != CompressorSpec::Kind::Identity) o << "k=" << r.compressor.k << '\n';
  if (r.compressor.kind == CompressorSpec::Kind::RandK) {
    o << "randk_scaled=" << (r.compressor.scaled ? "true" : "false") << '\n';
  }
  o << "aggregator=" << detail::aggregator_name(r.aggregator.base) << '\n'
    << "nnm=" << (r.aggregator.nnm ? "true" : "false") << '\n'
    << "rfa_steps=" << r.aggregator.rfa_steps << '\n'
    << "rfa_smoothing=" << detail::short_double(r.aggregator.rfa_smoothing) << '\n'
    << "cwtm_trim=" << r.aggregator.trim << '\n'
    << "attack=" << detail::attack_name(r.attack.kind) << '\n';
  if (r.attack.z) o << "attack_z=" << detail::short_double(*r.attack.z) << '\n';
  o << "partition=" << (r.partition == PartitionScheme::IidUniform ? "iid" : "label_sorted") << '\n'
    << "record_every=" << r.record_every << '\n';
  return o.str();
}

/// Largest feature index in LIBSVM text (the stream is rewound afterwards).
inline std::size_t infer_libsvm_dim(std::istream& in) {
  std::size_t mx = 0;
  std::string tok;
  while (in >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) continue;
    try {
      mx = std::max<std::size_t>(mx, std::stoull(tok.substr(0, colon)));
    } catch (const std::exception&) {
      throw ParseError("bad feature index in '" + tok + "'");
    }
  }
  in.clear();
  in.seekg(0);
  if (mx == 0) throw ParseError("no features found");
  return mx;
}

/// The synthetic dataset described by the settings (independent of the run seed).
inline Dataset synthetic_dataset(const DataSource& src) {
  RngStream rng = derive_stream(src.synth_seed, kServerStream, 0, Purpose::Synthetic);
  return synth_logreg(src.synth_m, src.synth_d, src.synth_separation, rng);
}

struct SweepOutput {
  std::vector<std::filesystem::path> files;
  std::vector<MetricsSeries> runs;
};

inline void write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

/// Runs every (gamma, seed) pair. Writes <name>[_g<gamma>]_seed<S>.csv per
/// run and, when `summary` is set, <name>[_g<gamma>]_summary.csv with
/// per-column mean and standard error across seeds. An empty gamma list
/// means the configured step size only.
inline SweepOutput run_sweep(const ExperimentSettings& settings, const Dataset& data,
                             const std::vector<std::uint64_t>& seeds,
                             const std::vector<double>& gammas, bool summary,
                             std::ostream* log = nullptr) {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  ExperimentSettings local = settings;
  finalize_for_dimension(local, data.dim());
  std::error_code ec;
  std::filesystem::create_directories(local.out_dir, ec);
  if (ec) throw IoError("cannot create " + local.out_dir + ": " + ec.message());

  const bool fan_out = !gammas.empty();
  const std::vector<double> steps = fan_out ? gammas : std::vector<double>{local.run.gamma};
  SweepOutput result;
  for (double gamma : steps) {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    std::string stem = local.name;
    if (fan_out) stem += "_g" + detail::short_double(gamma);
    std::vector<MetricsSeries> group;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = local.run;
      cfg.gamma = gamma;
      cfg.seed = seed;
      MetricsSeries series = run(cfg, data);
      series.config_echo = echo_config(cfg);
      const auto path = std::filesystem::path(local.out_dir) / (stem + "_seed" + std::to_string(seed) + ".csv");
      write_file(path, [&](std::ostream& o) { emit_csv(series, o); });
      if (log) {
        const auto& last = series.records.back();
        *log << path.string() << ": final loss " << detail::short_double(last.loss)
             << ", x_hat (round " << series.xhat_round << ") grad_norm_sq "
             << detail::short_double(series.xhat_grad_norm_sq) << '\n';
      }
      result.files.push_back(path);
      group.push_back(std::move(series));
    }
    if (summary) {
      const auto path = std::filesystem::path(local.out_dir) / (stem + "_summary.csv");
      write_file(path, [&](std::ostream& o) { emit_summary_csv(group, o); });
      result.files.push_back(path);
    }
    for (auto& g : group) result.runs.push_back(std::move(g));
  }
  return result;
}

}  // namespace byzsim
