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
#include <deque>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"

namespace amusim::amu {
namespace {

using testing::Machine;

constexpr std::uint32_t kData = 16 * 1024;  // SPM data area used by these tests

/// Drives the AMU directly, standing in for a core that commits in order.
struct Driver {
  explicit Driver(std::uint32_t q = 256, AmuConfig cfg = {}, double far_ns = 100.0) : m(far_ns, cfg) {
    m.unit->cfg_write(CfgReg::queue_base, 0);
    m.unit->cfg_write(CfgReg::queue_length, q);
  }
  Amu& amu() { return *m.unit; }

  /// Allocates, issues and commits one request; returns its ID (0 on failure).
  RequestId request(RequestKind kind, std::uint32_t spm, Addr far) {
    const Seq t = ++tag;
    const AllocResult r = amu().alloc(t);
    if (r.status != AllocStatus::ok) return kNoRequest;
    amu().issue(t, kind, r.id, spm, far);
    amu().commit(t);
    return r.id;
  }

  /// Polls getfin until `n` IDs arrive, releasing each.
  std::vector<RequestId> drain(std::size_t n) {
    std::vector<RequestId> got;
    while (got.size() < n) {
      m.sim.run_until_idle();
      const GetfinResult g = amu().getfin();
      if (g.id == kNoRequest) {
        if (amu().outstanding() == 0 && amu().asmc().finished_count() == 0) break;
        continue;
      }
      got.push_back(g.id);
      amu().release(g.id);
    }
    return got;
  }

  Machine m;
  Seq tag = 0;
};

// ---- list vector register ---------------------------------------------------

TEST(ListVectorRegister, LoadPlacesBatchAtTopLanes) {
  ListVectorRegister r;
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.pointer(), 32);
  std::vector<RequestId> ids{make_id(7), make_id(8), make_id(9)};
  r.load(ids);
  EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(r.pointer(), 29);
  EXPECT_EQ(r.pop(), make_id(7));
  EXPECT_EQ(r.pop(), make_id(8));
  EXPECT_EQ(r.contents(), std::vector<RequestId>{make_id(9)});
  EXPECT_EQ(r.pop(), make_id(9));
  EXPECT_TRUE(r.empty());
  EXPECT_THROW(r.pop(), InvariantViolation);
}

TEST(ListVectorRegister, HoldsAtMostThirtyOneIds) {
  ListVectorRegister r;
  std::vector<RequestId> ids;
  for (std::uint32_t i = 1; i <= 31; ++i) ids.push_back(make_id(i));
  r.load(ids);
  EXPECT_EQ(r.pointer(), 1);
  ids.push_back(make_id(32));
  EXPECT_ANY_THROW(r.load(ids));
}

// ---- configuration ----------------------------------------------------------

TEST(Amu, QueueLengthInitializesFreeListOfThatSize) {
  Driver d(256);
  EXPECT_EQ(d.amu().asmc().free_count(), 256u);
  EXPECT_EQ(d.amu().metadata_bytes(), 20u * 256u);
  EXPECT_TRUE(d.amu().quiescent());
  EXPECT_NO_THROW(d.amu().audit());
  auto ring = d.amu().asmc().free_ring();
  std::sort(ring.begin(), ring.end());
  for (std::uint32_t i = 0; i < 256; ++i) EXPECT_EQ(ring[i], make_id(i + 1));
}

TEST(Amu, MetadataBeyondSpmIsRejected) {
  Driver d(16);
  EXPECT_THROW(d.amu().cfg_write(CfgReg::queue_length, 4000), ConfigError);  // 80000 B > 64 KB
  EXPECT_THROW(d.amu().cfg_write(CfgReg::queue_length, 0), ConfigError);
  EXPECT_THROW(d.amu().cfg_write(CfgReg::granularity, 0), ConfigError);
}

TEST(Amu, QueueReconfigurationWhileBusyIsRejected) {
  Driver d(64);
  d.amu().cfg_write(CfgReg::granularity, 64);
  ASSERT_NE(d.request(RequestKind::aload, kData, mem::kFarBase), kNoRequest);
  EXPECT_THROW(d.amu().cfg_write(CfgReg::queue_length, 32), ConfigError);
}

// ---- alloc ------------------------------------------------------------------

TEST(Amu, AllocFetchesOneBatchThenPopsLocally) {
  Driver d(256);
  const auto before = d.amu().stats().asmc_messages;
  const AllocResult first = d.amu().alloc(1);
  ASSERT_EQ(first.status, AllocStatus::ok);
  EXPECT_EQ(first.latency, 2 * d.amu().config().hop_cycles);
  EXPECT_EQ(d.amu().stats().asmc_messages, before + 1);
  EXPECT_EQ(d.amu().alsu().free_register().size(), 30u);
  EXPECT_EQ(d.amu().asmc().free_count(), 256u - 31u);
  for (Seq t = 2; t <= 31; ++t) {
    const AllocResult r = d.amu().alloc(t);
    ASSERT_EQ(r.status, AllocStatus::ok);
    EXPECT_EQ(r.latency, 1u);
  }
  EXPECT_EQ(d.amu().stats().asmc_messages, before + 1);
  EXPECT_TRUE(d.amu().alsu().free_register().empty());
}

TEST(Amu, AllocReturnsZeroWhenAllIdsAreTaken) {
  Driver d(8);
  d.amu().cfg_write(CfgReg::granularity, 8);
  for (std::uint32_t i = 0; i < 8; ++i) ASSERT_NE(d.request(RequestKind::aload, kData + i * 8, mem::kFarBase + i * 8), kNoRequest);
  const AllocResult r = d.amu().alloc(++d.tag);
  EXPECT_EQ(r.status, AllocStatus::failed);
  EXPECT_EQ(r.id, kNoRequest);
  EXPECT_EQ(d.drain(8).size(), 8u);
  EXPECT_EQ(d.amu().alloc(++d.tag).status, AllocStatus::ok);
}

// ---- requests ---------------------------------------------------------------

TEST(Amu, AloadSplitsIntoLineSizedPackets) {
  Driver d(64);
  d.amu().cfg_write(CfgReg::granularity, 512);
  const auto p0 = d.m.hier->far_link().packets();
  d.request(RequestKind::aload, kData, mem::kFarBase);
  d.m.sim.run_until_idle();
  EXPECT_EQ(d.m.hier->far_link().packets() - p0, 8u);
  d.amu().cfg_write(CfgReg::granularity, 8);
  d.request(RequestKind::aload, kData, mem::kFarBase + 4096);
  d.m.sim.run_until_idle();
  EXPECT_EQ(d.m.hier->far_link().packets() - p0, 9u);
  EXPECT_EQ(d.amu().stats().subrequests_issued, 9u);
}

TEST(Amu, AloadAndAstoreMoveBytes) {
  Driver d(64);
  d.amu().cfg_write(CfgReg::granularity, 128);
  for (std::uint32_t i = 0; i < 16; ++i) d.m.image.store<std::uint64_t>(mem::kFarBase + i * 8, 1000 + i);
  d.request(RequestKind::aload, kData, mem::kFarBase);
  ASSERT_EQ(d.drain(1).size(), 1u);
  for (std::uint32_t i = 0; i < 16; ++i) EXPECT_EQ(d.m.hier->spm().load<std::uint64_t>(kData + i * 8), 1000 + i);
  d.request(RequestKind::astore, kData, mem::kFarBase + 8192);
  ASSERT_EQ(d.drain(1).size(), 1u);
  for (std::uint32_t i = 0; i < 16; ++i) EXPECT_EQ(d.m.image.load<std::uint64_t>(mem::kFarBase + 8192 + i * 8), 1000 + i);
}

TEST(Amu, GetfinReturnsEveryIssuedIdExactlyOnce) {
  Driver d(256);
  d.amu().cfg_write(CfgReg::granularity, 64);
  std::multiset<RequestId> issued;
  for (std::uint32_t i = 0; i < 200; ++i) {
    const RequestId id = d.request(RequestKind::aload, kData + (i % 64) * 64, mem::kFarBase + i * 64);
    ASSERT_NE(id, kNoRequest);
    issued.insert(id);
  }
  const auto got = d.drain(200);
  EXPECT_EQ(std::multiset<RequestId>(got.begin(), got.end()), issued);
  EXPECT_EQ(d.amu().getfin().id, kNoRequest);
  EXPECT_NO_THROW(d.amu().audit());
}

TEST(Amu, OutstandingNeverExceedsQueueLength) {
  Driver d(32);
  d.amu().cfg_write(CfgReg::granularity, 64);
  std::uint32_t peak = 0;
  std::uint32_t done = 0;
  std::uint32_t next = 0;
  while (done < 500) {
    while (next < 500 && d.request(RequestKind::aload, kData, mem::kFarBase + (next % 1024) * 64) != kNoRequest) ++next;
    // Sampled after the hop to the controller, before any response returns.
    d.m.sim.schedule(50, [&] { peak = std::max(peak, d.amu().outstanding()); });
    d.m.sim.run_until_idle();
    for (GetfinResult g = d.amu().getfin(); g.id != kNoRequest; g = d.amu().getfin()) {
      d.amu().release(g.id);
      ++done;
    }
  }
  EXPECT_LE(peak, 32u);
  EXPECT_EQ(peak, 32u);
}

TEST(Amu, InvalidRequestsFault) {
  Driver d(256);
  d.amu().cfg_write(CfgReg::granularity, 64);
  const AllocResult r = d.amu().alloc(1);
  EXPECT_THROW(d.amu().issue(1, RequestKind::aload, kNoRequest, kData, mem::kFarBase), SimFault);
  EXPECT_THROW(d.amu().issue(1, RequestKind::aload, r.id, 0, mem::kFarBase), SimFault);  // metadata
  EXPECT_THROW(d.amu().issue(1, RequestKind::aload, r.id, 64 * 1024 - 32, mem::kFarBase), SimFault);
  EXPECT_THROW(d.amu().issue(1, RequestKind::aload, r.id, kData, mem::kLocalBase), SimFault);
  EXPECT_THROW(d.amu().issue(1, RequestKind::aload, r.id, kData, mem::kFarBase + 8), SimFault);  // straddles
}

TEST(Amu, ReleaseOfUndeliveredIdIsAnInvariantViolation) {
  Driver d(16);
  EXPECT_THROW(d.amu().release(make_id(3)), InvariantViolation);
}

// ---- speculation ------------------------------------------------------------

TEST(Amu, SquashedBatchIsReusedWithTheSameIds) {
  Driver d(256);
  std::vector<RequestId> first;
  for (Seq t = 1; t <= 31; ++t) first.push_back(d.amu().alloc(t).id);
  const auto msgs = d.amu().stats().asmc_messages;
  d.amu().squash(1);
  EXPECT_NO_THROW(d.amu().audit());
  std::vector<RequestId> again;
  for (Seq t = 100; t < 131; ++t) again.push_back(d.amu().alloc(t).id);
  EXPECT_EQ(again, first);
  EXPECT_EQ(d.amu().stats().asmc_messages, msgs);
  EXPECT_EQ(d.amu().stats().uir_reuses, 1u);
  EXPECT_NO_THROW(d.amu().audit());
}

TEST(Amu, PartialSquashRestoresTheRegister) {
  Driver d(256);
  std::vector<RequestId> ids;
  for (Seq t = 1; t <= 10; ++t) ids.push_back(d.amu().alloc(t).id);
  d.amu().squash(6);
  EXPECT_EQ(d.amu().alsu().free_register().size(), 26u);
  for (Seq t = 20; t < 25; ++t) EXPECT_EQ(d.amu().alloc(t).id, ids[t - 15]);
  EXPECT_NO_THROW(d.amu().audit());
}

TEST(Amu, RandomSquashesPreserveTheIdPartition) {
  AmuConfig cfg;
  Driver d(64, cfg, 50.0);
  d.amu().cfg_write(CfgReg::granularity, 8);
  std::mt19937_64 rng(99);
  std::deque<Seq> pending;  // allocated and issued, not yet committed
  Seq tag = 0;
  int squashes = 0;
  std::uint64_t completed = 0;
  while (squashes < 10000) {
    const auto op = rng() % 10;
    if (op < 5) {
      const AllocResult r = d.amu().alloc(++tag);
      if (r.status == AllocStatus::ok) {
        d.amu().issue(tag, RequestKind::aload, r.id, kData + (rng() % 64) * 8, mem::kFarBase + (rng() % 4096) * 8);
        pending.push_back(tag);
      } else if (!pending.empty()) {
        d.amu().commit(pending.back());
        pending.clear();
      }
    } else if (op < 7 && !pending.empty()) {
      const std::size_t keep = rng() % pending.size();
      d.amu().commit(pending[keep]);
      pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(keep) + 1);
    } else if (op < 9) {
      const Seq from = pending.empty() ? tag + 1 : pending[rng() % pending.size()];
      d.amu().squash(from);
      while (!pending.empty() && pending.back() >= from) pending.pop_back();
      ++squashes;
      ASSERT_NO_THROW(d.amu().audit()) << "after squash " << squashes;
    } else {
      d.m.sim.run_until_idle();
      for (GetfinResult g = d.amu().getfin(); g.id != kNoRequest; g = d.amu().getfin()) {
        d.amu().release(g.id);
        ++completed;
      }
    }
  }
  if (!pending.empty()) d.amu().commit(pending.back());
  d.m.sim.run_until_idle();
  for (GetfinResult g = d.amu().getfin(); g.id != kNoRequest; g = d.amu().getfin()) d.amu().release(g.id);
  EXPECT_NO_THROW(d.amu().audit());
  EXPECT_EQ(d.amu().outstanding(), 0u);
  EXPECT_GT(completed, 1000u);
}

// ---- batching versus DMA mode -------------------------------------------

std::uint64_t messages_for(std::uint32_t list_capacity, std::uint32_t n) {
  AmuConfig cfg;
  cfg.list_capacity = list_capacity;
  Driver d(512, cfg);
  d.amu().cfg_write(CfgReg::granularity, 64);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (d.request(RequestKind::aload, kData + (i % 64) * 64, mem::kFarBase + i * 64) == kNoRequest) return 0;
  }
  if (d.drain(n).size() != n) return 0;
  return d.amu().stats().asmc_messages;
}

TEST(Amu, BatchingAmortizesControllerMessages) {
  // 310 requests: 10 alloc batches + 310 deliveries + 10 getfin batches + 10 recycle flushes.
  EXPECT_EQ(messages_for(31, 310), 340u);
  // One ID per message for alloc and getfin.
  EXPECT_EQ(messages_for(1, 310), 310u + 310u + 310u + 10u);
}

}  // namespace
}  // namespace amusim::amu
