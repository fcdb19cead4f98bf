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

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "amusim/cpu/core.hpp"
#include "amusim/mem/memory_image.hpp"

namespace amusim::cpu {
namespace {

using mem::kFarBase;
using mem::kLocalBase;

StreamOptions far_at(double ns) {
  StreamOptions o;
  o.memory.far.base_latency_ns = ns;
  return o;
}

TEST(Core, IndependentComputesAreIssueWidthBound) {
  std::vector<InstRecord> s(512, InstRecord::compute(1));
  const StreamResult r = execute_stream(s);
  // 86 dispatch groups of six; the last completes two cycles after dispatch.
  EXPECT_NEAR(static_cast<double>(r.cycles), 86.0, 2.0);
  EXPECT_EQ(r.stats.committed, 512u);
  EXPECT_NEAR(r.ipc, 6.0, 0.2);
}

TEST(Core, DependentChainIsLatencyBound) {
  std::vector<InstRecord> s;
  for (Seq i = 0; i < 100; ++i) s.push_back(InstRecord::compute(3, {i == 0 ? kNoDep : i - 1}));
  const StreamResult r = execute_stream(s);
  EXPECT_EQ(r.cycles, 1u + 300u);
}

TEST(Core, FarLoadAtHeadStallsTheWindow) {
  // One far miss followed by independent work: once 511 younger instructions
  // fill the ROB, dispatch waits for the load to retire.
  std::vector<InstRecord> s{InstRecord::load(kFarBase, 8)};
  for (int i = 0; i < 2000; ++i) s.push_back(InstRecord::compute(1));
  StreamOptions o = far_at(1000.0);
  o.timeline = true;
  const StreamResult r = execute_stream(s, o);
  const Cycle miss = 4 + 10 + 12 + 3000 + 90;
  EXPECT_EQ(r.stats.peak_rob, 512u);
  EXPECT_LT(r.timeline[511].dispatch, 100u);
  EXPECT_GE(r.timeline[512].dispatch, miss);
  // Retirement is then commit-width bound.
  EXPECT_NEAR(static_cast<double>(r.cycles), static_cast<double>(miss) + 2000.0 / 6.0, 3.0);

  o.core.rob_entries = 4096;
  const StreamResult wide = execute_stream(s, o);
  EXPECT_LT(wide.timeline[2000].dispatch, 400u);
}

TEST(Core, AsynchronousLoadDoesNotHoldTheWindow) {
  std::vector<InstRecord> sync{InstRecord::load(kFarBase, 8)};
  std::vector<InstRecord> async{InstRecord{}};
  async[0].kind = InstKind::aload;
  async[0].ami_id = 1;
  for (int i = 0; i < 2000; ++i) {
    sync.push_back(InstRecord::compute(1));
    async.push_back(InstRecord::compute(1));
  }
  const Cycle ts = execute_stream(sync, far_at(1000.0)).cycles;
  const Cycle ta = execute_stream(async, far_at(1000.0)).cycles;
  EXPECT_NEAR(static_cast<double>(ta), 2001.0 / 6.0, 3.0);
  EXPECT_GT(ts, ta + 3000);
}

TEST(Core, OccupancyNeverExceedsRobOrLsq) {
  std::mt19937_64 rng(5);
  std::vector<InstRecord> s;
  for (Seq i = 0; i < 5000; ++i) {
    const auto k = rng() % 4;
    const Seq dep = i > 0 && rng() % 3 == 0 ? i - 1 - rng() % std::min<Seq>(i, 20) : kNoDep;
    if (k == 0) {
      s.push_back(InstRecord::load(kFarBase + (rng() % 100000) * 64, 8, {dep}));
    } else if (k == 1) {
      s.push_back(InstRecord::store(kLocalBase + (rng() % 1000) * 64, 8, {dep}));
    } else {
      s.push_back(InstRecord::compute(1 + rng() % 5, {dep}));
    }
  }
  StreamOptions o = far_at(500.0);
  o.core.rob_entries = 128;
  o.core.lsq_entries = 32;
  const StreamResult r = execute_stream(s, o);
  EXPECT_EQ(r.stats.committed, 5000u);
  EXPECT_LE(r.stats.peak_rob, 128u);
  EXPECT_LE(r.stats.peak_lsq, 32u);
  EXPECT_EQ(r.stats.peak_lsq, 32u);
}

/// Independent scheduler: instruction i dispatches at floor(i / width) and
/// starts once dispatched and its inputs are done.
Cycle brute_force_finish(const std::vector<InstRecord>& s, std::uint32_t width) {
  std::vector<Cycle> done(s.size());
  Cycle last = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Cycle start = i / width + 1;
    for (Seq d : s[i].deps) {
      if (d != kNoDep) start = std::max(start, done[d]);
    }
    done[i] = start + s[i].latency;
    last = std::max(last, done[i]);
  }
  return last;
}

TEST(Core, MatchesBruteForceSchedulerOnRandomDags) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<InstRecord> s;
    const std::size_t n = 200 + rng() % 300;
    for (Seq i = 0; i < n; ++i) {
      InstRecord r = InstRecord::compute(1 + static_cast<std::uint32_t>(rng() % 8));
      for (int k = 0; k < 3 && i > 0; ++k) {
        if (rng() % 2) r.add_dep(rng() % i);
      }
      s.push_back(r);
    }
    StreamOptions o;
    o.core.issue_width = 1 + static_cast<std::uint32_t>(rng() % 6);
    o.core.commit_width = 4096;
    o.core.rob_entries = 4096;
    const StreamResult r = execute_stream(s, o);
    ASSERT_EQ(r.cycles, brute_force_finish(s, o.core.issue_width)) << "seed " << seed;
  }
}

TEST(Core, BaselineMlpIsBoundedByMshrs) {
  std::vector<InstRecord> s;
  for (int i = 0; i < 2000; ++i) s.push_back(InstRecord::load(kFarBase + static_cast<Addr>(i) * 4096, 8));
  const StreamResult r = execute_stream(s, far_at(1000.0));
  EXPECT_LE(r.mlp, 48.0);
  EXPECT_GT(r.mlp, 40.0);
}

TEST(Core, ForwardDependencyIsRejected) {
  std::vector<InstRecord> s{InstRecord::compute(1, {1}), InstRecord::compute(1)};
  EXPECT_THROW(execute_stream(s), SimFault);
  std::vector<InstRecord> self{InstRecord::compute(1, {0})};
  EXPECT_THROW(execute_stream(self), SimFault);
}

TEST(Core, TooManyDependenciesAreRejected) {
  InstRecord r;
  for (Seq d = 0; d < kMaxDeps; ++d) r.add_dep(d);
  r.add_dep(0);  // duplicate is ignored
  EXPECT_EQ(r.dep_count(), kMaxDeps);
  EXPECT_THROW(r.add_dep(99), InvariantViolation);
}

TEST(Core, InvalidParamsAreRejected) {
  CoreParams p;
  p.rob_entries = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.squash_probability = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
}

/// Replays a fixed vector and records what the core commits.
class ReplaySource final : public InstSource {
 public:
  explicit ReplaySource(std::vector<InstRecord> s) : s_(std::move(s)) {}
  FetchResult fetch(Seq seq) override {
    ++fetches;
    if (seq >= s_.size()) return FetchResult{FetchStatus::end, {}};
    return FetchResult{FetchStatus::ok, s_[seq]};
  }
  void on_commit(Seq seq, const InstRecord&) override { committed.push_back(seq); }
  void on_squash(Seq from) override { squashed_from.push_back(from); }
  std::vector<Seq> committed;
  std::vector<Seq> squashed_from;
  std::uint64_t fetches = 0;

 private:
  std::vector<InstRecord> s_;
};

TEST(Core, SquashRefetchesAndCommitsEachInstructionOnce) {
  sim::Simulator sim;
  std::vector<InstRecord> s;
  for (Seq i = 0; i < 300; ++i) s.push_back(InstRecord::compute(5, {i == 0 ? kNoDep : i - 1}));
  ReplaySource src(s);
  Core core(sim, nullptr, src, nullptr, CoreParams{});
  core.start();
  sim.schedule_at(50, [&] { core.squash_from(core.retired_count() + 20); });
  sim.run_until_idle();
  ASSERT_TRUE(core.finished());
  EXPECT_EQ(core.stats().squashes, 1u);
  EXPECT_EQ(src.committed.size(), 300u);
  for (Seq i = 0; i < 300; ++i) EXPECT_EQ(src.committed[i], i);
  EXPECT_GT(src.fetches, 301u);
  EXPECT_EQ(core.rob_occupancy(), 0u);
  EXPECT_EQ(core.lsq_occupancy(), 0u);
}

TEST(Core, SquashOutsideWindowIsAnInvariantViolation) {
  sim::Simulator sim;
  ReplaySource src({InstRecord::compute(1)});
  Core core(sim, nullptr, src, nullptr, CoreParams{});
  EXPECT_THROW(core.squash_from(5), InvariantViolation);
}

TEST(Core, RandomSquashesDoNotChangeWhatCommits) {
  sim::Simulator sim(17);
  std::vector<InstRecord> s;
  for (Seq i = 0; i < 3000; ++i) s.push_back(InstRecord::compute(1 + i % 4, {i > 2 ? i - 3 : kNoDep}));
  ReplaySource src(s);
  CoreParams p;
  p.squash_probability = 0.2;
  Core core(sim, nullptr, src, nullptr, p);
  core.start();
  sim.run_until_idle();
  ASSERT_TRUE(core.finished());
  EXPECT_GT(core.stats().squashes, 50u);
  ASSERT_EQ(src.committed.size(), 3000u);
  EXPECT_TRUE(std::is_sorted(src.committed.begin(), src.committed.end()));
}

TEST(Core, CycleAttributionCoversTheRun) {
  std::vector<InstRecord> s;
  for (int i = 0; i < 100; ++i) s.push_back(InstRecord::load(kFarBase + i * 64, 8));
  const StreamResult r = execute_stream(s, far_at(200.0));
  Cycle total = 0;
  for (Cycle c : r.stats.cycles_by_category) total += c;
  EXPECT_EQ(total, r.cycles);
}

}  // namespace
}  // namespace amusim::cpu
