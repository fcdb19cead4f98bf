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
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"

namespace amusim::rt {
namespace {

using testing::RuntimeMachine;

// ---- SPM allocator ----------------------------------------------------------

TEST(SpmAllocator, SlotsAreDisjointAndBelowTheLimit) {
  SpmAllocator a(0, 1000, 64);
  EXPECT_EQ(a.capacity(), 15u);
  std::set<std::uint32_t> got;
  std::uint32_t off = 0;
  while (a.try_alloc(off)) {
    EXPECT_EQ(off % 64, 0u);
    EXPECT_LE(off + 64, 1000u);
    EXPECT_TRUE(got.insert(off).second);
  }
  EXPECT_EQ(got.size(), 15u);
  EXPECT_EQ(a.available(), 0u);
  a.free(*got.begin());
  EXPECT_TRUE(a.try_alloc(off));
  EXPECT_EQ(off, *got.begin());
}

TEST(SpmAllocator, BadFreesFault) {
  SpmAllocator a(128, 1024, 64);
  std::uint32_t off = 0;
  ASSERT_TRUE(a.try_alloc(off));
  a.free(off);
  EXPECT_THROW(a.free(off), RuntimeFault);
  EXPECT_THROW(a.free(130), RuntimeFault);
  EXPECT_THROW(SpmAllocator(0, 32, 64), ConfigError);
}

// ---- guard table ------------------------------------------------------------

TEST(AddressGuardTable, InsertLookupErase) {
  AddressGuardTable g(GuardConfig{3, 16, 16}, mem::kLocalBase);
  EXPECT_FALSE(g.lookup(0x1234).held);
  EXPECT_EQ(g.lookup(0x1234).probes.size(), 3u);
  const Addr b = g.insert(0x1234);
  EXPECT_TRUE(g.held(0x1234));
  const auto l = g.lookup(0x1234);
  EXPECT_TRUE(l.held);
  EXPECT_EQ(l.probes.back(), b);
  EXPECT_EQ(g.erase(0x1234), b);
  EXPECT_FALSE(g.held(0x1234));
  EXPECT_EQ(g.size(), 0u);
  EXPECT_THROW(g.erase(0x1234), RuntimeFault);
}

TEST(AddressGuardTable, OverflowIsAFault) {
  AddressGuardTable g(GuardConfig{1, 2, 16}, mem::kLocalBase);
  int inserted = 0;
  EXPECT_THROW(
      {
        for (Addr a = 8; a < 8 * 100; a += 8) {
          g.insert(a);
          ++inserted;
        }
      },
      RuntimeFault);
  EXPECT_LE(inserted, 2);
}

TEST(GuardConfig, RejectsNonPowerOfTwoBuckets) {
  EXPECT_THROW((GuardConfig{3, 1000, 16}.validate()), ConfigError);
  EXPECT_THROW((GuardConfig{0, 1024, 16}.validate()), ConfigError);
}

// ---- tasks ------------------------------------------------------------------

Task load_once(Runtime& rt, Addr far, std::uint64_t* out) {
  const std::uint32_t slot = co_await rt.acquire_slot();
  co_await rt.aload(slot, far, 8);
  rt.spm_load(slot, 8);
  *out = rt.spm().load<std::uint64_t>(slot);
  rt.release_slot(slot);
}

Task load_many(Runtime& rt, Addr far, std::uint32_t m, std::uint64_t* sum) {
  const std::uint32_t slot = co_await rt.acquire_slot();
  for (std::uint32_t i = 0; i < m; ++i) {
    co_await rt.aload(slot, far + i * 64, 8);
    *sum += rt.spm().load<std::uint64_t>(slot);
  }
  rt.release_slot(slot);
}

TEST(Runtime, NoTasksFinishesImmediately) {
  RuntimeMachine m;
  const Cycle t = m.run();
  EXPECT_TRUE(m.core->finished());
  EXPECT_TRUE(m.runtime.finished());
  EXPECT_LT(t, 20u);
  EXPECT_EQ(m.runtime.stats().getfin_calls, 0u);
}

TEST(Runtime, SingleAloadDeliversDataAfterTheFarLatency) {
  RuntimeMachine m;
  m.image.store<std::uint64_t>(mem::kFarBase + 64, 0xfeedULL);
  std::uint64_t got = 0;
  m.runtime.spawn(load_once(m.runtime, mem::kFarBase + 64, &got));
  const Cycle t = m.run();
  EXPECT_EQ(got, 0xfeedULL);
  EXPECT_TRUE(m.runtime.finished());
  EXPECT_GE(t, 3000u + 90u + 2u);
  EXPECT_LT(t, 3500u);
  EXPECT_EQ(m.runtime.stats().deliveries, 1u);
  EXPECT_TRUE(m.unit->quiescent());
}

TEST(Runtime, EveryCompletionIsObservedThroughGetfin) {
  const std::uint32_t n = 20;
  const std::uint32_t per = 15;
  RuntimeMachine m({}, 300.0);
  std::vector<std::uint64_t> sums(n, 0);
  for (std::uint32_t i = 0; i < per * n; ++i) m.image.store<std::uint64_t>(mem::kFarBase + i * 64, i + 1);
  for (std::uint32_t t = 0; t < n; ++t) m.runtime.spawn(load_many(m.runtime, mem::kFarBase + t * per * 64, per, &sums[t]));
  m.run();
  const auto& st = m.runtime.stats();
  EXPECT_EQ(st.deliveries, std::uint64_t{n} * per);
  EXPECT_EQ(st.getfin_calls - st.getfin_empty, std::uint64_t{n} * per);
  EXPECT_EQ(st.tasks_completed, n);
  for (std::uint32_t t = 0; t < n; ++t) {
    const std::uint64_t lo = std::uint64_t{t} * per + 1;
    EXPECT_EQ(sums[t], (lo + lo + per - 1) * per / 2);
  }
  EXPECT_NO_THROW(m.unit->audit());
}

TEST(Runtime, IdExhaustionDelaysRequestsButCompletesThemAll) {
  RuntimeConfig rc;
  rc.queue_length = 256;
  RuntimeMachine m(rc);
  std::vector<std::uint64_t> got(300, 0);
  for (std::uint32_t i = 0; i < 300; ++i) {
    m.image.store<std::uint64_t>(mem::kFarBase + i * 64, 7 * i + 1);
    m.runtime.spawn(load_once(m.runtime, mem::kFarBase + i * 64, &got[i]));
  }
  m.run();
  EXPECT_EQ(m.runtime.stats().requests_delayed, 44u);
  EXPECT_EQ(m.runtime.stats().tasks_completed, 300u);
  for (std::uint32_t i = 0; i < 300; ++i) EXPECT_EQ(got[i], 7u * i + 1) << i;
  EXPECT_TRUE(m.unit->quiescent());
}

struct GuardLog {
  std::vector<int> order;
  int inside = 0;
  int max_inside = 0;
};

Task guarded(Runtime& rt, int me, Addr key, GuardLog* log) {
  const std::uint32_t slot = co_await rt.acquire_slot();
  co_await rt.start_access(key);
  log->order.push_back(me);
  log->max_inside = std::max(log->max_inside, ++log->inside);
  co_await rt.aload(slot, mem::kFarBase + me * 64, 8);  // suspend while holding the guard
  --log->inside;
  rt.end_access(key);
  rt.release_slot(slot);
}

TEST(Runtime, GuardGrantsInArrivalOrderWithMutualExclusion) {
  RuntimeMachine m({}, 200.0);
  GuardLog log;
  for (int i = 0; i < 6; ++i) m.runtime.spawn(guarded(m.runtime, i, 0xabc0, &log));
  m.run();
  EXPECT_EQ(log.order, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(log.max_inside, 1);
  EXPECT_EQ(m.runtime.stats().guard_contended, 5u);
  EXPECT_EQ(m.runtime.stats().guard_handoffs, 5u);
  EXPECT_EQ(m.runtime.guards().size(), 0u);
}

TEST(Runtime, DistinctAddressesDoNotContend) {
  RuntimeMachine m({}, 200.0);
  GuardLog log;
  for (int i = 0; i < 6; ++i) m.runtime.spawn(guarded(m.runtime, i, 0x1000 + i * 8, &log));
  m.run();
  EXPECT_EQ(m.runtime.stats().guard_contended, 0u);
  EXPECT_EQ(log.max_inside, 6);
}

Task hold_forever(Runtime& rt, Addr key) {
  co_await rt.start_access(key);
}

TEST(Runtime, UnreleasedGuardIsReportedAsDeadlock) {
  RuntimeMachine m;
  m.runtime.spawn(hold_forever(m.runtime, 0x40));
  m.runtime.spawn(hold_forever(m.runtime, 0x40));
  EXPECT_THROW(m.run(), RuntimeFault);
}

Task end_without_start(Runtime& rt) {
  rt.end_access(0x80);
  co_return;
}

TEST(Runtime, EndAccessWithoutStartFaults) {
  RuntimeMachine m;
  m.runtime.spawn(end_without_start(m.runtime));
  EXPECT_THROW(m.run(), RuntimeFault);
}

TEST(Runtime, TaskApiOutsideATaskFaults) {
  RuntimeMachine m;
  EXPECT_THROW(m.runtime.end_access(0x80), RuntimeFault);
  EXPECT_THROW(m.runtime.release_slot(0), RuntimeFault);
  EXPECT_THROW(m.runtime.spawn(Task{}), RuntimeFault);
}

Task store_and_forget(Runtime& rt, Addr far, std::uint64_t v) {
  const std::uint32_t slot = co_await rt.acquire_slot();
  rt.spm().store<std::uint64_t>(slot, v);
  rt.spm_store(slot, 8);
  rt.astore_detached(slot, far, 8);
}

TEST(Runtime, DetachedStoresLandAndReturnTheirSlots) {
  RuntimeMachine m({}, 500.0);
  for (std::uint32_t i = 0; i < 50; ++i) m.runtime.spawn(store_and_forget(m.runtime, mem::kFarBase + i * 64, i * 3));
  m.run();
  for (std::uint32_t i = 0; i < 50; ++i) EXPECT_EQ(m.image.load<std::uint64_t>(mem::kFarBase + i * 64), i * 3);
  EXPECT_EQ(m.runtime.slots().in_use(), 0u);
  EXPECT_EQ(m.runtime.stats().detached_stores, 50u);
}

TEST(Runtime, RandomSquashesReplayTheSameIds) {
  RuntimeConfig rc;
  rc.queue_length = 64;
  cpu::CoreParams cp;
  cp.squash_probability = 0.3;
  std::uint64_t audits = 0;
  RuntimeMachine m(rc, 200.0, {}, cp);
  m.core_params.after_squash = [&] {
    m.unit->audit();
    ++audits;
  };
  std::vector<std::uint64_t> sums(16, 0);
  for (std::uint32_t i = 0; i < 16 * 20; ++i) m.image.store<std::uint64_t>(mem::kFarBase + i * 64, i + 1);
  for (std::uint32_t t = 0; t < 16; ++t) m.runtime.spawn(load_many(m.runtime, mem::kFarBase + t * 20 * 64, 20, &sums[t]));
  m.run();
  EXPECT_TRUE(m.runtime.finished());
  EXPECT_GT(m.core->stats().squashes, 20u);
  EXPECT_EQ(audits, m.core->stats().squashes);
  for (std::uint32_t t = 0; t < 16; ++t) {
    const std::uint64_t lo = std::uint64_t{t} * 20 + 1;
    EXPECT_EQ(sums[t], (lo + lo + 19) * 20 / 2);
  }
}

}  // namespace
}  // namespace amusim::rt
