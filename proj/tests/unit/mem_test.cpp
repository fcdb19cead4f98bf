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
#include <list>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "amusim/mem/cache.hpp"
#include "amusim/mem/far_link.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/mem/memory_image.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::mem {
namespace {

struct Mem {
  explicit Mem(HierarchyConfig hc = {}) : sim(1, 3.0) {
    image.map_region(RegionKind::local, kLocalBase, kDefaultLocalBytes);
    image.map_region(RegionKind::far, kFarBase, kDefaultFarBytes);
    if (hc.spm_bytes > 0) image.map_region(RegionKind::spm, kSpmBase, hc.spm_bytes);
    hier = std::make_unique<Hierarchy>(sim, image, hc);
  }
  Cycle timed(Addr a, std::uint32_t size = 8) {
    Cycle done = 0;
    const Cycle t0 = sim.now();
    hier->sync_access(a, size, AccessKind::read, [&](Cycle c) { done = c; });
    sim.run_until_idle();
    return done - t0;
  }
  sim::Simulator sim;
  MemoryImage image;
  std::unique_ptr<Hierarchy> hier;
};

HierarchyConfig with_far(double ns) {
  HierarchyConfig hc;
  hc.far.base_latency_ns = ns;
  return hc;
}

// ---- cache tags -----------------------------------------------------------

/// Reference LRU cache: one list per set, most recent at the front.
class OracleCache {
 public:
  OracleCache(std::uint64_t sets, std::uint32_t ways) : sets_(sets), ways_(ways), lru_(sets) {}
  bool access(std::uint64_t line) {
    auto& s = lru_[line % sets_];
    auto it = std::find(s.begin(), s.end(), line);
    const bool hit = it != s.end();
    if (hit) s.erase(it);
    s.push_front(line);
    if (s.size() > ways_) s.pop_back();
    return hit;
  }

 private:
  std::uint64_t sets_;
  std::uint32_t ways_;
  std::vector<std::list<std::uint64_t>> lru_;
};

TEST(CacheTags, MatchesIndependentLruOracleOnRandomTraces) {
  CacheLevelConfig cfg{4 * 1024, 4, 64, 4, 8};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CacheTags tags(cfg);
    OracleCache oracle(cfg.sets(), cfg.associativity);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 20000; ++i) {
      const std::uint64_t line = rng() % 200;
      const bool hit = tags.access(line);
      if (!hit) tags.fill(line);
      ASSERT_EQ(hit, oracle.access(line)) << "seed " << seed << " step " << i;
    }
  }
}

TEST(CacheTags, StreamingPassHitsOnlyWithinLines) {
  // 8 B words over an array 4x the cache: only the first touch of a line misses.
  CacheLevelConfig cfg{4 * 1024, 4, 64, 4, 8};
  CacheTags tags(cfg);
  std::uint64_t hits = 0;
  const std::uint64_t words = 4 * cfg.capacity_bytes / 8;
  for (std::uint64_t w = 0; w < words; ++w) {
    const std::uint64_t line = w * 8 / 64;
    if (tags.access(line)) {
      ++hits;
    } else {
      tags.fill(line);
    }
  }
  EXPECT_EQ(hits, words - words / 8);
}

TEST(CacheTags, FillReportsLruVictim) {
  CacheLevelConfig cfg{2 * 64, 2, 64, 1, 1};  // one set, two ways
  CacheTags tags(cfg);
  EXPECT_FALSE(tags.fill(1).has_value());
  EXPECT_FALSE(tags.fill(2).has_value());
  EXPECT_TRUE(tags.access(1));
  EXPECT_EQ(tags.fill(3), std::optional<std::uint64_t>(2));
}

TEST(CacheLevelConfig, RejectsBadGeometry) {
  EXPECT_THROW((CacheLevelConfig{1000, 4, 64, 4, 8}.validate()), ConfigError);
  EXPECT_THROW((CacheLevelConfig{4096, 4, 64, 4, 0}.validate()), ConfigError);
  EXPECT_NO_THROW((CacheLevelConfig{32 * 1024, 16, 64, 4, 48}.validate()));
}

// ---- MSHR pool --------------------------------------------------------------

TEST(MshrPool, FuzzNeverExceedsCapacityAndGrantsEveryWaiter) {
  for (std::uint32_t cap : {1u, 3u, 48u}) {
    sim::Simulator s(cap);
    MshrPool pool(cap);
    std::uint64_t granted = 0;
    bool over = false;
    const int requests = 2000;
    for (int i = 0; i < requests; ++i) {
      s.schedule(s.rng()() % 500, [&] {
        pool.acquire([&] {
          ++granted;
          over = over || pool.in_use() > pool.capacity();
          s.schedule(1 + s.rng()() % 40, [&] { pool.release(); });
        });
      });
    }
    s.run_until_idle();
    EXPECT_FALSE(over);
    EXPECT_EQ(granted, static_cast<std::uint64_t>(requests));
    EXPECT_EQ(pool.in_use(), 0u);
    EXPECT_EQ(pool.waiting(), 0u);
    EXPECT_LE(pool.peak_in_use(), cap);
  }
}

TEST(MshrPool, WaitersAreGrantedInArrivalOrder) {
  MshrPool pool(1);
  std::vector<int> order;
  pool.acquire([&] { order.push_back(0); });
  for (int i = 1; i <= 3; ++i) pool.acquire([&, i] { order.push_back(i); });
  for (int i = 0; i < 3; ++i) pool.release();
  EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3}));
}

// ---- far link ---------------------------------------------------------------

TEST(FarLink, IdleServiceTimeIsLatencyPlusOverheadPlusPayload) {
  FarLink link({1000.0, 16.0, 30.0}, 3.0);
  // 1000 ns + 30 ns + 64/16 ns = 1034 ns = 3102 cycles
  EXPECT_EQ(link.reserve(0, 64), 3102u);
  EXPECT_EQ(link.transfer_cycles(8), 2u);
  EXPECT_EQ(link.transfer_cycles(512), 96u);
}

TEST(FarLink, UnlimitedBandwidthIsExactLatency) {
  FarLink link({500.0, 0.0, 10.0}, 3.0);
  for (Cycle t : {0u, 5u, 5u, 100u}) EXPECT_EQ(link.reserve(t, 4096), t + 1500 + 30);
}

TEST(FarLink, SaturatedPacketsSerializeByTransmissionTime) {
  FarLink link({1000.0, 16.0, 30.0}, 3.0);
  std::vector<Cycle> done;
  for (int i = 0; i < 200; ++i) done.push_back(link.reserve(0, 64));
  for (int i = 0; i < 200; ++i) EXPECT_EQ(done[i], 3090u + 12u * (i + 1));
  EXPECT_EQ(link.packets(), 200u);
  EXPECT_EQ(link.bytes(), 200u * 64u);
}

// ---- hierarchy --------------------------------------------------------------

TEST(Hierarchy, CachedLineHitsInFourCycles) {
  Mem m;
  const Addr a = kLocalBase + 0x40;
  m.timed(a);
  EXPECT_EQ(m.timed(a), 4u);
}

TEST(Hierarchy, UncachedFarReadIsTheHandSumOfConfiguredDelays) {
  Mem m(with_far(1000.0));
  // L1 tag check 4 + L2 tag check 10 + link 12 + 3000 + 90
  EXPECT_EQ(m.timed(kFarBase), 4u + 10u + 12u + 3000u + 90u);
}

TEST(Hierarchy, LocalMissPaysDram) {
  Mem m;
  EXPECT_EQ(m.timed(kLocalBase), 4u + 10u + m.hier->dram_cycles());
  EXPECT_EQ(m.hier->dram_cycles(), 180u);
}

TEST(Hierarchy, FortyNinthFarMissQueuesBehindFortyEightMshrs) {
  HierarchyConfig hc = with_far(1000.0);
  hc.far.bandwidth_bytes_per_ns = 0.0;  // isolate the MSHR effect
  Mem m(hc);
  std::vector<Cycle> done(49);
  for (int i = 0; i < 49; ++i) {
    m.hier->sync_access(kFarBase + i * 4096, 8, AccessKind::read, [&, i](Cycle c) { done[i] = c; });
  }
  m.sim.run_until_idle();
  const Cycle one = 4 + 10 + 3000 + 90;
  for (int i = 0; i < 48; ++i) EXPECT_EQ(done[i], one);
  EXPECT_GE(done[48], 2 * one - 1);
  EXPECT_EQ(m.hier->l1_mshr().peak_in_use(), 48u);
}

TEST(Hierarchy, SameLineMissesMergeIntoOneFetch) {
  Mem m(with_far(100.0));
  for (int i = 0; i < 8; ++i) m.hier->sync_access(kFarBase + i * 8, 8, AccessKind::read, [](Cycle) {});
  m.sim.run_until_idle();
  EXPECT_EQ(m.hier->stats().far_fetches, 1u);
  EXPECT_EQ(m.hier->stats().mshr_merges, 7u);
}

TEST(Hierarchy, FarRequestBypassesCachesAndMshrs) {
  Mem m(with_far(1000.0));
  std::vector<Cycle> done;
  for (int i = 0; i < 200; ++i) {
    m.hier->far_read(kFarBase + i * 64, 64, [&](Cycle c, std::span<const std::uint8_t>) { done.push_back(c); });
  }
  m.sim.run_until_idle();
  ASSERT_EQ(done.size(), 200u);
  EXPECT_EQ(done.front(), 3102u);
  EXPECT_EQ(done.back(), 3090u + 12u * 200u);
  EXPECT_EQ(m.hier->l1_mshr().peak_in_use(), 0u);
  EXPECT_FALSE(m.hier->l1_tags().probe(kFarBase / 64));
}

TEST(Hierarchy, ZeroByteFarRequestIsRejected) {
  Mem m;
  EXPECT_THROW(m.hier->far_read(kFarBase, 0, [](Cycle, std::span<const std::uint8_t>) {}), SimFault);
}

TEST(Hierarchy, FarRequestToLocalMemoryIsRejected) {
  Mem m;
  EXPECT_THROW(m.hier->far_read(kLocalBase, 8, [](Cycle, std::span<const std::uint8_t>) {}), SimFault);
}

TEST(Hierarchy, UnmappedAddressFaults) {
  Mem m;
  EXPECT_THROW(m.hier->sync_access(0x10, 8, AccessKind::read, [](Cycle) {}), SimFault);
}

TEST(Hierarchy, LineCrossingSyncAccessFaults) {
  Mem m;
  EXPECT_THROW(m.hier->sync_access(kLocalBase + 60, 8, AccessKind::read, [](Cycle) {}), SimFault);
}

TEST(Hierarchy, SpmAccessTakesTenCyclesAndIsFunctional) {
  HierarchyConfig hc;
  hc.spm_bytes = 64 * 1024;
  Mem m(hc);
  Cycle wrote = 0;
  m.hier->spm_write(0, {1, 2, 3, 4, 5, 6, 7, 8}, [&](Cycle c) { wrote = c; });
  m.sim.run_until_idle();
  EXPECT_EQ(wrote, 10u);
  std::vector<std::uint8_t> got;
  Cycle read = 0;
  m.hier->spm_read(0, 8, [&](Cycle c, std::span<const std::uint8_t> d) {
    read = c;
    got.assign(d.begin(), d.end());
  });
  m.sim.run_until_idle();
  EXPECT_EQ(read - wrote, 10u);
  EXPECT_EQ(got, (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(m.hier->l1_mshr().peak_in_use(), 0u);
}

TEST(Hierarchy, SpmBoundaryAccessFaults) {
  HierarchyConfig hc;
  hc.spm_bytes = 64 * 1024;
  Mem m(hc);
  EXPECT_THROW(m.hier->spm_read(65535, 2, [](Cycle, std::span<const std::uint8_t>) {}), SimFault);
  EXPECT_NO_THROW(m.hier->spm_read(65534, 2, [](Cycle, std::span<const std::uint8_t>) {}));
}

TEST(Hierarchy, SyncAccessToSpmWindowRoutesToScratchpad) {
  HierarchyConfig hc;
  hc.spm_bytes = 64 * 1024;
  Mem m(hc);
  EXPECT_EQ(m.timed(kSpmBase + 128, 64), 10u);
  EXPECT_EQ(m.hier->stats().spm_accesses, 1u);
}

TEST(Hierarchy, FunctionalReadsReplaySequentialWrites) {
  Mem m(with_far(200.0));
  std::mt19937_64 rng(11);
  std::vector<std::uint8_t> shadow(4096, 0);
  for (int i = 0; i < 300; ++i) {
    const std::uint32_t off = static_cast<std::uint32_t>(rng() % 512) * 8;
    if (rng() % 2) {
      std::vector<std::uint8_t> data(8);
      for (auto& b : data) b = static_cast<std::uint8_t>(rng());
      std::copy(data.begin(), data.end(), shadow.begin() + off);
      m.hier->sync_write(kFarBase + off, data, [](Cycle) {});
    } else {
      std::vector<std::uint8_t> want(shadow.begin() + off, shadow.begin() + off + 8);
      bool ok = false;
      m.hier->sync_read(kFarBase + off, 8, [&, want](Cycle, std::span<const std::uint8_t> d) {
        ok = std::equal(d.begin(), d.end(), want.begin());
      });
      m.sim.run_until_idle();
      ASSERT_TRUE(ok) << "read " << i;
    }
    m.sim.run_until_idle();
  }
}

TEST(Hierarchy, StreamPrefetcherCutsSequentialMisses) {
  auto run = [](bool prefetch) {
    HierarchyConfig hc = with_far(1000.0);
    hc.stream_prefetcher = prefetch;
    Mem m(hc);
    Cycle t = 0;
    for (int i = 0; i < 64; ++i) {
      Cycle c = m.timed(kFarBase + i * 64);
      t += c;
    }
    return t;
  };
  EXPECT_LT(run(true), run(false) / 2);
}

TEST(MemoryImage, RegionsMustBeDisjointAndAllocationsAligned) {
  MemoryImage img;
  img.map_region(RegionKind::local, kLocalBase, 1 << 20);
  EXPECT_THROW(img.map_region(RegionKind::far, kLocalBase + 4096, 1 << 20), ConfigError);
  const Addr a = img.allocate(RegionKind::local, 10, 4096);
  const Addr b = img.allocate(RegionKind::local, 10, 64);
  EXPECT_EQ(a % 4096, 0u);
  EXPECT_GE(b, a + 10);
  img.store<std::uint64_t>(a, 0x1122334455667788ULL);
  EXPECT_EQ(img.load<std::uint64_t>(a), 0x1122334455667788ULL);
  EXPECT_EQ(img.load<std::uint64_t>(b), 0u);
}

}  // namespace
}  // namespace amusim::mem
