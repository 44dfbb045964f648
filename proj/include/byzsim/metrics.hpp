// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Per-round diagnostics and their CSV form.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "byzsim/core.hpp"
#include "byzsim/error.hpp"

namespace byzsim {

struct RoundRecord {
  std::size_t t = 0;
  double loss = 0.0;          // f(x_t) over the honest shards
  double grad_norm_sq = 0.0;  // ||grad f(x_t)||^2
  double msg_variance = 0.0;  // dispersion of honest messages (momentum or wire)
  double momentum_dev = 0.0;  // (1/G) sum ||v_i - grad f_i(x_t)||^2
  double het_hat = 0.0;       // (1/G) sum ||grad f_i(x_t) - grad f(x_t)||^2
  std::uint64_t bytes_up = 0; // cumulative uplink bytes, all n workers
  double kappa_hat = 0.0;     // measured robustness ratio on the honest subset
  std::optional<double> wire_variance;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct MetricsSeries {
  std::vector<RoundRecord> records;
  std::string config_echo;
  std::size_t xhat_round = 0;
  double xhat_grad_norm_sq = 0.0;
};

/// (1/G) sum ||m_i - mean||^2.
inline double honest_variance(std::span<const Vector> messages) {
  if (messages.empty()) throw ConfigError("honest_variance: empty input");
  const Vector centre = mean_of(messages);
  double s = 0.0;
  for (const auto& m : messages) s += dist_sq(m, centre);
  return s / static_cast<double>(messages.size());
}

inline constexpr const char* kCsvHeader =
    "t,loss,grad_norm_sq,msg_variance,momentum_dev,het_hat,bytes_up,kappa_hat";

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

inline std::uint64_t to_u64(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("bad integer '" + s + "'", line);
  return v;
}

}  // namespace detail

/// Header row, then one row per record; 17 significant digits. A trailing
/// wire_variance column is added when the records carry it.
inline void emit_csv(const MetricsSeries& series, std::ostream& out) {
  const bool wire = !series.records.empty() && series.records.front().wire_variance.has_value();
  out << kCsvHeader << (wire ? ",wire_variance" : "") << '\n';
  for (const auto& r : series.records) {
    out << r.t << ',' << detail::fmt17(r.loss) << ',' << detail::fmt17(r.grad_norm_sq) << ','
        << detail::fmt17(r.msg_variance) << ',' << detail::fmt17(r.momentum_dev) << ','
        << detail::fmt17(r.het_hat) << ',' << r.bytes_up << ',' << detail::fmt17(r.kappa_hat);
    if (wire) out << ',' << detail::fmt17(r.wire_variance.value_or(NAN));
    out << '\n';
  }
  if (!out) throw IoError("emit_csv: write failed");
}

inline std::vector<RoundRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty metrics CSV");
  const bool wire = line == std::string(kCsvHeader) + ",wire_variance";
  if (!wire && line != kCsvHeader) throw ParseError("unexpected metrics header", 1);
  const std::size_t cols = wire ? 9 : 8;
  std::vector<RoundRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != cols) throw ParseError("wrong column count", lineno);
    RoundRecord r;
    r.t = detail::to_u64(cells[0], lineno);
    r.loss = detail::to_double(cells[1], lineno);
    r.grad_norm_sq = detail::to_double(cells[2], lineno);
    r.msg_variance = detail::to_double(cells[3], lineno);
    r.momentum_dev = detail::to_double(cells[4], lineno);
    r.het_hat = detail::to_double(cells[5], lineno);
    r.bytes_up = detail::to_u64(cells[6], lineno);
    r.kappa_hat = detail::to_double(cells[7], lineno);
    if (wire) r.wire_variance = detail::to_double(cells[8], lineno);
    out.push_back(r);
  }
  return out;
}

/// Companion table across seeds: for every numeric column, the mean and the
/// standard error (sample standard deviation / sqrt(seed count); 0 for a
/// single seed). All series must share the same round indices.
inline void emit_summary_csv(std::span<const MetricsSeries> runs, std::ostream& out) {
  if (runs.empty()) throw ConfigError("summary of zero runs");
  const std::size_t rows = runs.front().records.size();
  for (const auto& s : runs) {
    if (s.records.size() != rows) throw ConfigError("summary: runs have different lengths");
  }
  const bool wire = rows > 0 && runs.front().records.front().wire_variance.has_value();
  std::vector<std::string> names = {"loss",    "grad_norm_sq", "msg_variance", "momentum_dev",
                                    "het_hat", "bytes_up",     "kappa_hat"};
  if (wire) names.push_back("wire_variance");
  auto field = [](const RoundRecord& r, std::size_t c) -> double {
    switch (c) {
      case 0: return r.loss;
      case 1: return r.grad_norm_sq;
      case 2: return r.msg_variance;
      case 3: return r.momentum_dev;
      case 4: return r.het_hat;
      case 5: return static_cast<double>(r.bytes_up);
      case 6: return r.kappa_hat;
      default: return r.wire_variance.value_or(NAN);
    }
  };

  out << 't';
  for (const auto& n : names) out << ',' << n << "_mean," << n << "_stderr";
  out << '\n';
  const double s = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = runs.front().records[i].t;
    for (const auto& run : runs) {
      if (run.records[i].t != t) throw ConfigError("summary: runs disagree on round indices");
    }
    out << t;
    for (std::size_t c = 0; c < names.size(); ++c) {
      double sum = 0.0;
      for (const auto& run : runs) sum += field(run.records[i], c);
      const double mu = sum / s;
      double ss = 0.0;
      for (const auto& run : runs) {
        const double diff = field(run.records[i], c) - mu;
        ss += diff * diff;
      }
      const double se = runs.size() > 1 ? std::sqrt(ss / (s - 1.0)) / std::sqrt(s) : 0.0;
      out << ',' << detail::fmt17(mu) << ',' << detail::fmt17(se);
    }
    out << '\n';
  }
  if (!out) throw IoError("emit_summary_csv: write failed");
}

}  // namespace byzsim
