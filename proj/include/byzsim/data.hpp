// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Binary-classification datasets: LIBSVM text I/O, a synthetic generator and
// worker partitioning.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "byzsim/core.hpp"
#include "byzsim/error.hpp"
#include "byzsim/rng.hpp"

namespace byzsim {

/// Dense m x d feature matrix (row-major) with labels in {-1, +1}.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels)
      : dim_(dim), features_(std::move(features)), labels_(std::move(labels)) {
    if (dim_ == 0) throw ConfigError("dataset dimension must be positive");
    if (labels_.empty()) throw ConfigError("dataset must hold at least one sample");
    if (features_.size() != labels_.size() * dim_) {
      throw DimensionError("dataset: feature matrix is not m x d");
    }
    for (int b : labels_) {
      if (b != 1 && b != -1) throw ConfigError("dataset: labels must be -1 or +1");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t j) const {
    return {features_.data() + j * dim_, dim_};
  }
  int label(std::size_t j) const { return labels_[j]; }

  const std::vector<double>& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Copy of the selected rows, in the given order.
  Dataset select(std::span<const std::size_t> rows) const {
    std::vector<double> f;
    std::vector<int> l;
    f.reserve(rows.size() * dim_);
    l.reserve(rows.size());
    for (std::size_t j : rows) {
      auto r = row(j);
      f.insert(f.end(), r.begin(), r.end());
      l.push_back(labels_[j]);
    }
    return Dataset(dim_, std::move(f), std::move(l));
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline bool parse_index(std::string_view s, std::uint64_t& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

}  // namespace detail

/// Reads `<label> <idx>:<val> ...` lines. Indices are 1-based and must not
/// exceed d; missing indices are zero. Labels 0 are mapped to -1.
inline Dataset parse_libsvm(std::istream& in, std::size_t d) {
  if (d == 0) throw ConfigError("parse_libsvm: dimension must be positive");
  std::vector<double> features;
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string_view rest(line);
    auto next_token = [&rest]() -> std::string_view {
      const auto b = rest.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(b);
      const auto e = rest.find_first_of(" \t\r");
      std::string_view tok = rest.substr(0, e);
      rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
      return tok;
    };

    const std::string_view label_tok = next_token();
    if (label_tok.empty()) continue;
    double label_val = 0.0;
    if (!detail::parse_double(label_tok, label_val)) {
      throw ParseError("bad label '" + std::string(label_tok) + "'", lineno);
    }
    int label = 0;
    if (label_val == 1.0) {
      label = 1;
    } else if (label_val == -1.0 || label_val == 0.0) {
      label = -1;
    } else {
      throw ParseError("label must be one of -1, 0, +1", lineno);
    }

    const std::size_t base = features.size();
    features.resize(base + d, 0.0);
    for (std::string_view tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected idx:val, got '" + std::string(tok) + "'", lineno);
      }
      std::uint64_t idx = 0;
      double val = 0.0;
      if (!detail::parse_index(tok.substr(0, colon), idx) || idx == 0) {
        throw ParseError("bad feature index in '" + std::string(tok) + "'", lineno);
      }
      if (!detail::parse_double(tok.substr(colon + 1), val)) {
        throw ParseError("bad feature value in '" + std::string(tok) + "'", lineno);
      }
      if (idx > d) {
        throw RangeError("line " + std::to_string(lineno) + ": feature index " +
                         std::to_string(idx) + " exceeds dimension " + std::to_string(d));
      }
      features[base + idx - 1] = val;
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw ParseError("no samples in input");
  return Dataset(d, std::move(features), std::move(labels));
}

/// Writes nonzero entries with 17 significant digits, so parse_libsvm gives
/// back an identical dataset.
inline void write_libsvm(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (std::size_t j = 0; j < data.size(); ++j) {
    out << (data.label(j) > 0 ? "+1" : "-1");
    const auto r = data.row(j);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] == 0.0) continue;
      std::snprintf(buf, sizeof buf, " %zu:%.17g", k + 1, r[k]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write_libsvm: stream write failed");
}

enum class PartitionScheme { IidUniform, LabelSorted };

/// Contiguous shard boundaries: the first m % n shards get one extra sample.
inline std::vector<std::size_t> shard_sizes(std::size_t m, std::size_t n) {
  std::vector<std::size_t> sizes(n, m / n);
  for (std::size_t i = 0; i < m % n; ++i) ++sizes[i];
  return sizes;
}

/// Splits data over n workers. IidUniform shuffles first (Fisher-Yates driven
/// by rng); LabelSorted stable-sorts by label (-1 first) so shards are as
/// label-homogeneous as possible. rng is untouched by LabelSorted.
inline std::vector<Dataset> partition(const Dataset& data, std::size_t n,
                                      PartitionScheme scheme, RngStream& rng) {
  const std::size_t m = data.size();
  if (n == 0) throw ConfigError("partition: worker count must be positive");
  if (m < n) {
    throw ConfigError("partition: " + std::to_string(m) + " samples cannot fill " +
                      std::to_string(n) + " workers");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (scheme == PartitionScheme::IidUniform) {
    for (std::size_t i = m - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
      std::swap(order[i], order[j]);
    }
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.label(a) < data.label(b);
    });
  }
  std::vector<Dataset> shards;
  shards.reserve(n);
  std::size_t offset = 0;
  for (std::size_t size : shard_sizes(m, n)) {
    shards.push_back(data.select(std::span(order).subspan(offset, size)));
    offset += size;
  }
  return shards;
}

/// Synthetic logistic-regression data. A unit direction w* is drawn first,
/// then per sample d standard-normal features and one label-noise draw:
/// label = sign(a.w* + e), e ~ N(0, (1 / (2 separation))^2). separation = inf
/// gives noiseless labels; separation = 0 gives pure-noise labels.
inline Dataset synth_logreg(std::size_t m, std::size_t d, double separation, RngStream& rng) {
  if (m == 0 || d == 0) throw ConfigError("synth_logreg: m and d must be positive");
  if (!(separation >= 0.0)) throw ConfigError("synth_logreg: separation must be >= 0");
  Vector w(d);
  for (double& v : w) v = rng.normal();
  const double wn = std::sqrt(norm_sq(w));
  for (double& v : w) v /= wn;

  std::vector<double> features(m * d);
  std::vector<int> labels(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::span<double> a(features.data() + j * d, d);
    for (double& v : a) v = rng.normal();
    const double e = rng.normal();
    double score = dot(a, w);
    if (separation == 0.0) {
      score = e;
    } else if (std::isfinite(separation)) {
      score += e * (0.5 / separation);
    }
    labels[j] = score >= 0.0 ? 1 : -1;
  }
  return Dataset(d, std::move(features), std::move(labels));
}

}  // namespace byzsim
