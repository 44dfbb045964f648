// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "byzsim/data.hpp"
#include "byzsim/model.hpp"

namespace byzsim {
namespace {

Dataset parse(const std::string& text, std::size_t d) {
  std::istringstream in(text);
  return parse_libsvm(in, d);
}

TEST(Libsvm, ReadsSparseRow) {
  const Dataset ds = parse("+1 1:0.5 3:2.0\n", 3);
  EXPECT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.features(), (std::vector<double>{0.5, 0, 2.0}));
  EXPECT_EQ(ds.label(0), 1);
}

TEST(Libsvm, ZeroLabelMapsToMinusOne) {
  EXPECT_EQ(parse("0 2:1\n", 2).label(0), -1);
  EXPECT_EQ(parse("-1 2:1\n", 2).label(0), -1);
  EXPECT_EQ(parse("1 2:1\n", 2).label(0), 1);
}

TEST(Libsvm, CommentsAndBlankLines) {
  const Dataset ds = parse("# header\n\n+1 1:1 # trailing\n-1 2:1\n", 2);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.labels(), (std::vector<int>{1, -1}));
}

TEST(Libsvm, ErrorsCarryLineNumbers) {
  try {
    parse("+1 1:1\n+1 0:1\n", 3);
    FAIL() << "index 0 accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse("+1 1:abc\n", 3), ParseError);
  EXPECT_THROW(parse("2 1:1\n", 3), ParseError);
  EXPECT_THROW(parse("+1 4:1\n", 3), RangeError);
}

TEST(Libsvm, RoundTrip) {
  RngStream rng = derive_stream(1, 0, 0, Purpose::Synthetic);
  const Dataset original = synth_logreg(50, 8, 1.0, rng);
  std::stringstream buf;
  write_libsvm(buf, original);
  EXPECT_EQ(parse_libsvm(buf, 8), original);

  const Dataset sparse = parse("+1 2:0.25 7:-3\n-1 1:1e-300\n", 8);
  std::stringstream buf2;
  write_libsvm(buf2, sparse);
  EXPECT_EQ(parse_libsvm(buf2, 8), sparse);
}

TEST(Partition, ShardSizes) {
  EXPECT_EQ(shard_sizes(10, 2), (std::vector<std::size_t>{5, 5}));
  EXPECT_EQ(shard_sizes(10, 3), (std::vector<std::size_t>{4, 3, 3}));
}

Dataset labelled(std::vector<int> labels) {
  std::vector<double> f(labels.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = static_cast<double>(j);
  return Dataset(1, std::move(f), std::move(labels));
}

TEST(Partition, LabelSortedSeparatesClasses) {
  RngStream rng = derive_stream(1, kServerStream, 0, Purpose::Partition);
  const auto shards = partition(labelled({1, 1, -1, -1}), 2, PartitionScheme::LabelSorted, rng);
  ASSERT_EQ(shards.size(), 2u);
  EXPECT_EQ(shards[0].labels(), (std::vector<int>{-1, -1}));
  EXPECT_EQ(shards[1].labels(), (std::vector<int>{1, 1}));
}

TEST(Partition, TooFewSamples) {
  RngStream rng = derive_stream(1, kServerStream, 0, Purpose::Partition);
  EXPECT_THROW(partition(labelled({1, -1}), 3, PartitionScheme::IidUniform, rng), ConfigError);
}

std::vector<std::pair<double, int>> rows_of(const Dataset& d) {
  std::vector<std::pair<double, int>> out;
  for (std::size_t j = 0; j < d.size(); ++j) out.emplace_back(d.row(j)[0], d.label(j));
  return out;
}

TEST(Partition, ConservesMultiset) {
  RngStream gen = derive_stream(2, 0, 0, Purpose::Synthetic);
  std::vector<int> labels(97);
  for (int& b : labels) b = gen.uniform01() < 0.3 ? 1 : -1;
  const Dataset data = labelled(labels);
  auto expected = rows_of(data);
  std::sort(expected.begin(), expected.end());
  for (auto scheme : {PartitionScheme::IidUniform, PartitionScheme::LabelSorted}) {
    for (std::size_t n : {1u, 2u, 5u, 20u, 97u}) {
      RngStream rng = derive_stream(3, kServerStream, 0, Purpose::Partition);
      const auto shards = partition(data, n, scheme, rng);
      ASSERT_EQ(shards.size(), n);
      std::vector<std::pair<double, int>> got;
      const auto sizes = shard_sizes(data.size(), n);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(shards[i].size(), sizes[i]);
        for (const auto& r : rows_of(shards[i])) got.push_back(r);
      }
      std::sort(got.begin(), got.end());
      EXPECT_EQ(got, expected);
    }
  }
}

TEST(Partition, IidDependsOnSeedOnly) {
  const Dataset data = labelled(std::vector<int>(40, 1));
  RngStream a = derive_stream(3, kServerStream, 0, Purpose::Partition);
  RngStream b = derive_stream(3, kServerStream, 0, Purpose::Partition);
  RngStream c = derive_stream(4, kServerStream, 0, Purpose::Partition);
  const auto sa = partition(data, 4, PartitionScheme::IidUniform, a);
  EXPECT_EQ(sa, partition(data, 4, PartitionScheme::IidUniform, b));
  EXPECT_NE(sa, partition(data, 4, PartitionScheme::IidUniform, c));
}

TEST(Synthetic, NoiselessLabelsFollowTruth) {
  RngStream a = derive_stream(4, 0, 0, Purpose::Synthetic);
  RngStream b = derive_stream(4, 0, 0, Purpose::Synthetic);
  const Dataset noiseless = synth_logreg(500, 10, INFINITY, a);
  // Same draws as the noiseless call: w* first, then features and noise per row.
  Vector w(10);
  for (double& v : w) v = b.normal();
  for (std::size_t j = 0; j < noiseless.size(); ++j) {
    Vector row(10);
    for (double& v : row) v = b.normal();
    b.normal();
    EXPECT_EQ(noiseless.label(j), dot(row, w) >= 0.0 ? 1 : -1);
  }
}

TEST(Synthetic, Deterministic) {
  RngStream a = derive_stream(5, 0, 0, Purpose::Synthetic);
  RngStream b = derive_stream(5, 0, 0, Purpose::Synthetic);
  EXPECT_EQ(synth_logreg(100, 5, 1.0, a), synth_logreg(100, 5, 1.0, b));
}

TEST(Synthetic, RejectsBadArguments) {
  RngStream a = derive_stream(5, 0, 0, Purpose::Synthetic);
  EXPECT_THROW(synth_logreg(0, 5, 1.0, a), ConfigError);
  EXPECT_THROW(synth_logreg(5, 0, 1.0, a), ConfigError);
  EXPECT_THROW(synth_logreg(5, 5, -1.0, a), ConfigError);
}

// Plain full-gradient descent on the whole set, written out directly.
TEST(Synthetic, SeparationOneIsLearnable) {
  RngStream rng = derive_stream(6, 0, 0, Purpose::Synthetic);
  const Dataset data = synth_logreg(1000, 20, 1.0, rng);
  const std::size_t m = data.size(), d = data.dim();
  const double lambda = 1.0 / static_cast<double>(m);
  Vector x(d, 0.0);
  for (int it = 0; it < 500; ++it) {
    Vector g(d, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const auto a = data.row(j);
      const double b = data.label(j);
      const double coef = -b / (1.0 + std::exp(b * dot(a, x)));
      for (std::size_t k = 0; k < d; ++k) g[k] += coef * a[k] / static_cast<double>(m);
    }
    for (std::size_t k = 0; k < d; ++k) x[k] -= 0.5 * (g[k] + 2.0 * lambda * x[k]);
  }
  std::size_t correct = 0;
  for (std::size_t j = 0; j < m; ++j) correct += (dot(data.row(j), x) >= 0.0 ? 1 : -1) == data.label(j);
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(m), 0.80);
}

TEST(Dataset, Validation) {
  EXPECT_THROW(Dataset(2, {1.0, 2.0, 3.0}, {1, 1}), DimensionError);
  EXPECT_THROW(Dataset(1, {1.0}, {2}), ConfigError);
  EXPECT_THROW(Dataset(1, {}, {}), ConfigError);
}

}  // namespace
}  // namespace byzsim
