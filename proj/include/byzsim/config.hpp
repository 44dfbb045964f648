// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Flat `key=value` experiment files. Pairs are separated by newlines or
// whitespace; `#` starts a comment. Unknown keys are rejected and every key
// is optional (defaults follow the logistic-regression experiments).
//
//   dataset = synthetic | <path to LIBSVM file>
//   dim, gzip                       (LIBSVM input)
//   synth_m, synth_d, synth_separation, synth_seed
//   variant = dm21 | vrdm21 | ef21sgdm
//   gamma, eta, T, n, B, seed, seeds, init_batch, batch, lambda
//   compressor = topk | randk | identity, k, randk_scaled
//   aggregator = mean | cm | cwtm | rfa, nnm, rfa_steps, rfa_smoothing, cwtm_trim
//   attack = none | sf | lf | ipm | alie, attack_z
//   partition = iid | label_sorted
//   msg_variance = momentum | wire | both
//   record_every, out_dir, name

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "byzsim/engine.hpp"
#include "byzsim/error.hpp"

namespace byzsim {

struct DataSource {
  bool synthetic = true;
  std::string path;
  std::size_t dim = 0;               // LIBSVM dimension; 0 = infer from the file
  std::optional<bool> gzip;          // unset: decide from the .gz suffix
  std::size_t synth_m = 4000;
  std::size_t synth_d = 50;
  double synth_separation = 1.0;
  std::uint64_t synth_seed = 1;  // fixed across run seeds: the data stays put
};

struct ExperimentSettings {
  RunConfig run;
  DataSource data;
  std::string out_dir = ".";
  std::string name = "run";
  std::vector<std::uint64_t> seeds = {1};
  /// k was given explicitly; otherwise k = ceil(0.1 d) once d is known.
  bool k_explicit = false;
  bool cwtm_trim_explicit = false;
  /// Original text, echoed into run provenance.
  std::string source_text;
};

namespace detail {

inline std::string trim_ws(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double cfg_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t cfg_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline bool cfg_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::vector<std::uint64_t> cfg_uint_list(const std::string& key, const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(cfg_uint(key, trim_ws(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

template <typename Enum>
Enum cfg_enum(const std::string& key, const std::string& v,
              std::initializer_list<std::pair<const char*, Enum>> table) {
  std::string allowed;
  for (const auto& [name, value] : table) {
    if (v == name) return value;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(key + ": expected one of " + allowed + ", got '" + v + "'");
}

}  // namespace detail

/// ceil(0.1 d), at least 1.
inline std::size_t default_k(std::size_t d) {
  return std::max<std::size_t>(1, (d + 9) / 10);
}

/// Fills in values that depend on the data dimension and validates the run.
inline void finalize_for_dimension(ExperimentSettings& s, std::size_t d) {
  if (!s.k_explicit && s.run.compressor.kind != CompressorSpec::Kind::Identity) {
    s.run.compressor.k = default_k(d);
  }
  s.run.compressor.validate(d);
}

inline ExperimentSettings parse_config(std::string_view text) {
  ExperimentSettings s;
  s.source_text = std::string(text);
  RunConfig& r = s.run;
  r.compressor = CompressorSpec::top_k(0);
  r.aggregator = AggregatorSpec::rfa(8, 1e-6);
  bool nnm = true;
  std::optional<std::size_t> trim;
  std::map<std::string, std::string> seen;

  std::istringstream lines{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = std::regex_replace(line, std::regex(R"(\s*=\s*)"), "=");
    std::istringstream words(line);
    std::string pair;
    while (words >> pair) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + pair + "'");
      }
      std::string key = pair.substr(0, eq);
      std::string val = pair.substr(eq + 1);
      if (val.empty()) throw ConfigError(key + ": missing value");
      if (seen.count(key)) throw ConfigError(key + ": given twice");
      seen[key] = val;

      if (key == "dataset") {
        if (val == "synthetic") {
          s.data.synthetic = true;
        } else {
          s.data.synthetic = false;
          s.data.path = val;
        }
      } else if (key == "dim") {
        s.data.dim = detail::cfg_uint(key, val);
      } else if (key == "gzip") {
        s.data.gzip = detail::cfg_bool(key, val);
      } else if (key == "synth_m") {
        s.data.synth_m = detail::cfg_uint(key, val);
      } else if (key == "synth_d") {
        s.data.synth_d = detail::cfg_uint(key, val);
      } else if (key == "synth_seed") {
        s.data.synth_seed = detail::cfg_uint(key, val);
      } else if (key == "synth_separation") {
        if (val == "inf") {
          s.data.synth_separation = INFINITY;
        } else {
          s.data.synth_separation = detail::cfg_double(key, val);
        }
      } else if (key == "variant") {
        r.variant = detail::cfg_enum<AlgoVariant>(
            key, val, {{"dm21", AlgoVariant::DM21}, {"vrdm21", AlgoVariant::VRDM21},
                       {"ef21sgdm", AlgoVariant::EF21SGDM}});
      } else if (key == "gamma") {
        r.gamma = detail::cfg_double(key, val);
      } else if (key == "eta") {
        r.eta = detail::cfg_double(key, val);
      } else if (key == "T") {
        r.rounds = detail::cfg_uint(key, val);
      } else if (key == "n") {
        r.n = detail::cfg_uint(key, val);
      } else if (key == "B") {
        r.byzantine = detail::cfg_uint(key, val);
      } else if (key == "seed") {
        s.seeds = {detail::cfg_uint(key, val)};
      } else if (key == "seeds") {
        s.seeds = detail::cfg_uint_list(key, val);
      } else if (key == "init_batch") {
        r.init_batch = detail::cfg_uint(key, val);
      } else if (key == "batch") {
        r.batch = detail::cfg_uint(key, val);
      } else if (key == "lambda") {
        if (val != "auto") r.lambda = detail::cfg_double(key, val);
      } else if (key == "compressor") {
        r.compressor.kind = detail::cfg_enum<CompressorSpec::Kind>(
            key, val, {{"topk", CompressorSpec::Kind::TopK}, {"randk", CompressorSpec::Kind::RandK},
                       {"identity", CompressorSpec::Kind::Identity}});
      } else if (key == "k") {
        r.compressor.k = detail::cfg_uint(key, val);
        s.k_explicit = true;
      } else if (key == "randk_scaled") {
        r.compressor.scaled = detail::cfg_bool(key, val);
      } else if (key == "aggregator") {
        r.aggregator.base = detail::cfg_enum<AggregatorSpec::Base>(
            key, val, {{"mean", AggregatorSpec::Base::Mean}, {"cm", AggregatorSpec::Base::CM},
                       {"cwtm", AggregatorSpec::Base::CWTM}, {"rfa", AggregatorSpec::Base::RFA}});
      } else if (key == "nnm") {
        nnm = detail::cfg_bool(key, val);
      } else if (key == "rfa_steps") {
        r.aggregator.rfa_steps = detail::cfg_uint(key, val);
      } else if (key == "rfa_smoothing") {
        r.aggregator.rfa_smoothing = detail::cfg_double(key, val);
      } else if (key == "cwtm_trim") {
        trim = detail::cfg_uint(key, val);
        s.cwtm_trim_explicit = true;
      } else if (key == "attack") {
        r.attack.kind = detail::cfg_enum<AttackSpec::Kind>(
            key, val, {{"none", AttackSpec::Kind::None}, {"sf", AttackSpec::Kind::SignFlip},
                       {"lf", AttackSpec::Kind::LabelFlip}, {"ipm", AttackSpec::Kind::IPM},
                       {"alie", AttackSpec::Kind::ALIE}});
      } else if (key == "attack_z") {
        r.attack.z = detail::cfg_double(key, val);
      } else if (key == "partition") {
        r.partition = detail::cfg_enum<PartitionScheme>(
            key, val, {{"iid", PartitionScheme::IidUniform},
                       {"label_sorted", PartitionScheme::LabelSorted}});
      } else if (key == "msg_variance") {
        r.variance_source = detail::cfg_enum<VarianceSource>(
            key, val, {{"momentum", VarianceSource::Momentum}, {"wire", VarianceSource::Wire},
                       {"both", VarianceSource::Both}});
      } else if (key == "record_every") {
        r.record_every = detail::cfg_uint(key, val);
      } else if (key == "out_dir") {
        s.out_dir = val;
      } else if (key == "name") {
        s.name = val;
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    }
  }

  if (!(r.gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(r.eta > 0.0 && r.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  if (2 * r.byzantine >= r.n) {
    throw ConfigError("B = " + std::to_string(r.byzantine) + " must be below n/2 (n = " +
                      std::to_string(r.n) + ")");
  }
  if (r.compressor.kind != CompressorSpec::Kind::RandK && r.compressor.scaled) {
    throw ConfigError("randk_scaled applies to compressor=randk only");
  }
  r.aggregator.trim = trim.value_or(r.byzantine);
  if (nnm) r.aggregator.nnm = r.byzantine;
  if (s.data.synthetic && (s.data.synth_m == 0 || s.data.synth_d == 0)) {
    throw ConfigError("synth_m and synth_d must be positive");
  }
  r.seed = s.seeds.front();
  r.validate();
  if (s.data.synthetic) finalize_for_dimension(s, s.data.synth_d);
  return s;
}

}  // namespace byzsim
