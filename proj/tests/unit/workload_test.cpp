/*
 * Copyright 2026 The amusim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "amusim/exp/experiment.hpp"
#include "amusim/work/gups.hpp"
#include "amusim/work/workload.hpp"

namespace amusim::work {
namespace {

TEST(Gups, StartsMatchesIteratingTheGenerator) {
  std::uint64_t x = 1;
  for (std::int64_t n = 0; n < 5000; ++n) {
    ASSERT_EQ(gups_starts(n), x) << n;
    x = gups_next(x);
  }
}

TEST(Gups, StartsWrapsAtThePeriod) {
  EXPECT_EQ(gups_starts(kGupsPeriod), gups_starts(0));
  EXPECT_EQ(gups_starts(kGupsPeriod + 17), gups_starts(17));
  EXPECT_EQ(gups_starts(-1), gups_starts(kGupsPeriod - 1));
}

TEST(Gups, GeneratorShiftsInThePolynomialOnCarry) {
  EXPECT_EQ(gups_next(1), 2u);
  EXPECT_EQ(gups_next(0x8000000000000000ULL), 7u);
  EXPECT_EQ(gups_next(0xC000000000000000ULL), 0x8000000000000007ULL);
}

TEST(Workload, SlicesCoverTheRangeExactly) {
  for (std::uint64_t total : {0ULL, 1ULL, 7ULL, 100ULL, 1001ULL}) {
    for (std::uint32_t parts : {1u, 3u, 8u, 64u}) {
      EXPECT_EQ(slice_begin(total, parts, 0), 0u);
      EXPECT_EQ(slice_begin(total, parts, parts), total);
      for (std::uint32_t i = 0; i < parts; ++i) {
        const auto len = slice_begin(total, parts, i + 1) - slice_begin(total, parts, i);
        EXPECT_LE(len, total / parts + 1);
        EXPECT_GE(len, total / parts);
      }
    }
  }
}

TEST(Workload, UnknownBenchmarkOrKnobIsAConfigError) {
  EXPECT_THROW(build({"nope", 1, {}}), ConfigError);
  EXPECT_THROW(build({"gups", 1, {{"bogus", 3}}}), ConfigError);
  EXPECT_THROW(build({"gups", 1, {{"updates", 0}}}), ConfigError);
  EXPECT_THROW(default_knobs("nope"), ConfigError);
  EXPECT_NO_THROW(build({"ht_guarded", 1, {{"lookups", 8}}}));
}

TEST(Workload, NamesCoverTheCoreSetAndGuardedVariants) {
  const auto& all = benchmark_names();
  for (const auto& n : core_benchmark_names()) EXPECT_NE(std::find(all.begin(), all.end(), n), all.end());
  EXPECT_EQ(core_benchmark_names().size(), 6u);
  EXPECT_EQ(all.size(), 8u);
  for (const auto& n : all) EXPECT_TRUE(default_knobs(n).count("coroutines")) << n;
}

/// Scales small enough to run every benchmark in well under a second.
Knobs small(const std::string& b) {
  if (b == "gups") return {{"table_words", 1 << 16}, {"updates", 3000}, {"coroutines", 64}, {"queue_length", 128}};
  if (b == "gups_guarded") return {{"table_words", 1 << 16}, {"updates", 3000}, {"coroutines", 32}, {"queue_length", 64}};
  if (b == "bs") return {{"elements", 4096}, {"lookups", 128}, {"coroutines", 32}, {"queue_length", 64}};
  if (b == "ll") return {{"lists", 8}, {"nodes_per_list", 16}, {"lookups", 64}, {"coroutines", 16}, {"queue_length", 64}};
  if (b == "ht" || b == "ht_guarded") {
    return {{"buckets", 256}, {"load_factor", 2}, {"lookups", 256}, {"coroutines", 32}, {"queue_length", 64}};
  }
  if (b == "hj") return {{"buckets", 256}, {"build_tuples", 512}, {"probes", 256}, {"coroutines", 32}, {"queue_length", 64}};
  return {{"elements", 4096}, {"chunk_bytes", 256}, {"coroutines", 8}, {"queue_length", 32}};
}

exp::PointResult run_small(const std::string& bench, exp::Mode mode, std::uint64_t seed, double ns = 500.0) {
  exp::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.workload[bench] = small(bench);
  return exp::run_point(exp::resolve_point(cfg, mode, bench, ns));
}

class EveryBenchmark : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryBenchmark, VerifiesInEveryModeAcrossSeeds) {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    for (exp::Mode mode : {exp::Mode::baseline, exp::Mode::cxl_ideal, exp::Mode::amu, exp::Mode::amu_dma}) {
      const auto r = run_small(GetParam(), mode, seed);
      EXPECT_TRUE(r.row.verify) << GetParam() << " " << exp::to_string(mode) << " seed " << seed << ": "
                                << r.verify_detail;
      EXPECT_GT(r.row.exec_cycles, 0u);
    }
  }
}

TEST_P(EveryBenchmark, AsynchronousFormUsesTheUnit) {
  const auto r = run_small(GetParam(), exp::Mode::amu, 1);
  EXPECT_GT(r.amu.requests_completed, 0u);
  EXPECT_GT(r.row.asmc_messages, 0u);
  EXPECT_EQ(r.runtime.tasks_completed, r.runtime.tasks_spawned);
  const auto b = run_small(GetParam(), exp::Mode::baseline, 1);
  EXPECT_EQ(b.amu.requests_completed, 0u);
  EXPECT_EQ(b.row.asmc_messages, 0u);
}

INSTANTIATE_TEST_SUITE_P(All, EveryBenchmark, ::testing::ValuesIn(benchmark_names()),
                         [](const auto& info) { return info.param; });

TEST(Workload, GuardedVariantsSpendTimeInGuards) {
  EXPECT_GT(run_small("ht_guarded", exp::Mode::amu, 1).row.guard_time_fraction, 0.0);
  EXPECT_EQ(run_small("ht", exp::Mode::amu, 1).row.guard_time_fraction, 0.0);
}

TEST(Workload, SameSeedSameResultDifferentSeedDifferentData) {
  const auto a = run_small("ll", exp::Mode::amu, 5);
  const auto b = run_small("ll", exp::Mode::amu, 5);
  EXPECT_EQ(exp::csv_line(a.row), exp::csv_line(b.row));
  const auto c = run_small("ll", exp::Mode::amu, 6);
  EXPECT_NE(a.row.exec_cycles, c.row.exec_cycles);
}

}  // namespace
}  // namespace amusim::work
