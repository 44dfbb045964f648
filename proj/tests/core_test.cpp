// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "byzsim/core.hpp"
#include "byzsim/parallel.hpp"

namespace byzsim {
namespace {

TEST(Core, ElementwiseBasics) {
  EXPECT_EQ(add(Vector{1, 2}, Vector{3, 4}), (Vector{4, 6}));
  EXPECT_EQ(sub(Vector{1, 2}, Vector{3, 4}), (Vector{-2, -2}));
  EXPECT_EQ(scale(Vector{1, -2}, 0.0), (Vector{0, 0}));
  EXPECT_EQ(norm_sq(Vector{3, 4}), 25.0);
  EXPECT_EQ(dot(Vector{1, 2, 3}, Vector{4, 5, 6}), 32.0);
  EXPECT_EQ(dist_sq(Vector{1, 1}, Vector{4, 5}), 25.0);
}

TEST(Core, AxpyAndAddInto) {
  Vector y{1, 1};
  axpy(2.0, Vector{1, -1}, y);
  EXPECT_EQ(y, (Vector{3, -1}));
  add_into(Vector{1, 1}, y);
  EXPECT_EQ(y, (Vector{4, 0}));
}

TEST(Core, DimensionMismatchThrows) {
  EXPECT_THROW(add(Vector{1}, Vector{1, 2}), DimensionError);
  EXPECT_THROW(dot(Vector{1}, Vector{1, 2}), DimensionError);
  Vector y{0};
  EXPECT_THROW(axpy(1.0, Vector{1, 2}, y), DimensionError);
}

TEST(Core, MeanOf) {
  const std::vector<Vector> v = {{1, 10}, {3, 20}};
  EXPECT_EQ(mean_of(v), (Vector{2, 15}));
  EXPECT_THROW(mean_of(std::vector<Vector>{}), ConfigError);
}

TEST(Core, AllFinite) {
  EXPECT_TRUE(all_finite(Vector{0, 1e300}));
  EXPECT_FALSE(all_finite(Vector{0, NAN}));
  EXPECT_FALSE(all_finite(Vector{INFINITY}));
}

TEST(Parallel, ParallelForVisitsEachIndexOnce) {
  for (std::size_t threads : {1u, 3u, 8u}) {
    ThreadPool pool(threads);
    std::vector<int> hits(1000, 0);
    pool.parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Parallel, ExceptionsPropagate) {
  ThreadPool pool(4);
  EXPECT_THROW(pool.parallel_for(100,
                                 [](std::size_t i) {
                                   if (i == 37) throw ConfigError("boom");
                                 }),
               ConfigError);
  std::vector<int> hits(10, 0);
  pool.parallel_for(hits.size(), [&](std::size_t i) { hits[i] = 1; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 10);
}

TEST(Parallel, ThreadsFromEnv) {
  setenv("BYZSIM_THREADS", "3", 1);
  EXPECT_EQ(threads_from_env(), 3u);
  unsetenv("BYZSIM_THREADS");
  EXPECT_GE(threads_from_env(), 1u);
}

}  // namespace
}  // namespace byzsim
