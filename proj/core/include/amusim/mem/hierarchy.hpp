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

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "amusim/common.hpp"
#include "amusim/mem/cache.hpp"
#include "amusim/mem/far_link.hpp"
#include "amusim/mem/memory_image.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::mem {

enum class AccessKind : std::uint8_t { read, write };

struct HierarchyConfig {
  CacheLevelConfig l1{32 * 1024, 16, 64, 4, 48};
  CacheLevelConfig l2{256 * 1024, 8, 64, 10, 48};
  double dram_latency_ns = 60.0;
  FarLinkConfig far;
  std::uint32_t spm_bytes = 0;
  std::uint32_t spm_delay_cycles = 10;
  bool stream_prefetcher = false;
  std::uint32_t prefetch_degree = 4;
  std::uint32_t prefetch_history = 32;

  void validate() const;
};

struct HierarchyStats {
  std::uint64_t l1_hits = 0;
  std::uint64_t l1_misses = 0;
  std::uint64_t l2_hits = 0;
  std::uint64_t l2_misses = 0;
  std::uint64_t mshr_merges = 0;
  std::uint64_t dram_fetches = 0;
  std::uint64_t far_fetches = 0;
  std::uint64_t far_requests = 0;
  std::uint64_t spm_accesses = 0;
  std::uint64_t prefetches_issued = 0;
  std::uint64_t prefetches_dropped = 0;
};

/// Completion with the cycle and, for functional reads, the bytes read.
using ReadCallback = std::function<void(Cycle, std::span<const std::uint8_t>)>;
using DoneCallback = std::function<void(Cycle)>;

/// L1/L2 timing with MSHRs, local DRAM, the far link, and the SPM.
///
/// Synchronous accesses traverse L1 and L2 and hold one MSHR per level missed
/// until the fill returns. Far requests from the ASMC bypass both caches.
/// Functional data moves at completion time; timing-only accesses move none.
class Hierarchy {
 public:
  Hierarchy(sim::Simulator& sim, MemoryImage& image, const HierarchyConfig& cfg);
  Hierarchy(const Hierarchy&) = delete;
  Hierarchy& operator=(const Hierarchy&) = delete;

  /// Timing-only synchronous access. size <= line and no line crossing.
  void sync_access(Addr addr, std::uint32_t size, AccessKind kind, DoneCallback done);
  void sync_read(Addr addr, std::uint32_t size, ReadCallback done);
  void sync_write(Addr addr, std::vector<std::uint8_t> data, DoneCallback done);

  /// Cache-bypassing far access. `addr` must be far; size must be nonzero.
  void far_read(Addr addr, std::uint32_t size, ReadCallback done);
  void far_write(Addr addr, std::vector<std::uint8_t> data, DoneCallback done);

  /// Fixed-delay scratchpad access at an SPM offset.
  void spm_read(std::uint64_t offset, std::uint32_t size, ReadCallback done);
  void spm_write(std::uint64_t offset, std::vector<std::uint8_t> data, DoneCallback done);

  sim::Simulator& sim() { return sim_; }
  MemoryImage& image() { return image_; }
  Spm& spm() { return spm_; }
  const Spm& spm() const { return spm_; }
  FarLink& far_link() { return link_; }
  const HierarchyConfig& config() const { return cfg_; }
  const HierarchyStats& stats() const { return stats_; }
  const MshrPool& l1_mshr() const { return l1_mshr_; }
  const MshrPool& l2_mshr() const { return l2_mshr_; }
  const CacheTags& l1_tags() const { return l1_; }
  const CacheTags& l2_tags() const { return l2_; }

  Cycle dram_cycles() const { return dram_cycles_; }

 private:
  struct Access {
    Addr addr;
    std::uint32_t size;
    AccessKind kind;
    bool functional;
    std::vector<std::uint8_t> data;
    ReadCallback done;
  };
  using AccessPtr = std::shared_ptr<Access>;

  struct L2Pending {
    bool l1_waiting;
  };

  void submit_sync(AccessPtr a);
  void submit_spm(std::uint64_t offset, AccessPtr a);
  void submit_far(AccessPtr a);
  void finish(const AccessPtr& a);
  void finish_spm(std::uint64_t offset, const AccessPtr& a);

  void l1_miss(std::uint64_t line, AccessPtr a);
  void on_l1_mshr(std::uint64_t line, AccessPtr a);
  void l2_lookup(std::uint64_t line);
  void l2_miss(std::uint64_t line);
  void on_l2_mshr(std::uint64_t line);
  void memory_fetch(std::uint64_t line);
  void on_memory_fill(std::uint64_t line, bool far);
  void fill_l1(std::uint64_t line);
  void maybe_prefetch(std::uint64_t line);

  sim::Simulator& sim_;
  MemoryImage& image_;
  HierarchyConfig cfg_;
  CacheTags l1_;
  CacheTags l2_;
  MshrPool l1_mshr_;
  MshrPool l2_mshr_;
  FarLink link_;
  Spm spm_;
  Cycle dram_cycles_;
  std::unordered_map<std::uint64_t, std::vector<AccessPtr>> l1_pending_;
  std::unordered_map<std::uint64_t, L2Pending> l2_pending_;
  std::deque<std::uint64_t> miss_history_;
  HierarchyStats stats_;
};

}  // namespace amusim::mem
