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

#include "amusim/mem/hierarchy.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace amusim::mem {

void HierarchyConfig::validate() const {
  l1.validate("l1");
  l2.validate("l2");
  if (l1.line_bytes != l2.line_bytes) throw ConfigError("l1 and l2 must share a line size");
  if (dram_latency_ns < 0.0) throw ConfigError("dram latency must be non-negative");
  if (stream_prefetcher && prefetch_degree == 0) throw ConfigError("prefetch degree must be at least 1");
}

Hierarchy::Hierarchy(sim::Simulator& sim, MemoryImage& image, const HierarchyConfig& cfg)
    : sim_(sim),
      image_(image),
      cfg_(cfg),
      l1_((cfg.validate(), cfg.l1)),
      l2_(cfg.l2),
      l1_mshr_(cfg.l1.mshr_entries),
      l2_mshr_(cfg.l2.mshr_entries),
      link_(cfg.far, sim.clock().frequency_ghz),
      spm_(cfg.spm_bytes),
      dram_cycles_(sim.ns_to_cycles(cfg.dram_latency_ns)) {}

void Hierarchy::sync_access(Addr addr, std::uint32_t size, AccessKind kind, DoneCallback done) {
  submit_sync(std::make_shared<Access>(Access{addr, size, kind, false, {},
                                              [d = std::move(done)](Cycle c, std::span<const std::uint8_t>) {
                                                if (d) d(c);
                                              }}));
}

void Hierarchy::sync_read(Addr addr, std::uint32_t size, ReadCallback done) {
  submit_sync(std::make_shared<Access>(Access{addr, size, AccessKind::read, true, {}, std::move(done)}));
}

void Hierarchy::sync_write(Addr addr, std::vector<std::uint8_t> data, DoneCallback done) {
  const auto size = static_cast<std::uint32_t>(data.size());
  submit_sync(std::make_shared<Access>(Access{addr, size, AccessKind::write, true, std::move(data),
                                              [d = std::move(done)](Cycle c, std::span<const std::uint8_t>) {
                                                if (d) d(c);
                                              }}));
}

void Hierarchy::far_read(Addr addr, std::uint32_t size, ReadCallback done) {
  submit_far(std::make_shared<Access>(Access{addr, size, AccessKind::read, true, {}, std::move(done)}));
}

void Hierarchy::far_write(Addr addr, std::vector<std::uint8_t> data, DoneCallback done) {
  const auto size = static_cast<std::uint32_t>(data.size());
  submit_far(std::make_shared<Access>(Access{addr, size, AccessKind::write, true, std::move(data),
                                             [d = std::move(done)](Cycle c, std::span<const std::uint8_t>) {
                                               if (d) d(c);
                                             }}));
}

void Hierarchy::spm_read(std::uint64_t offset, std::uint32_t size, ReadCallback done) {
  submit_spm(offset, std::make_shared<Access>(Access{kSpmBase + offset, size, AccessKind::read, true, {},
                                                     std::move(done)}));
}

void Hierarchy::spm_write(std::uint64_t offset, std::vector<std::uint8_t> data, DoneCallback done) {
  const auto size = static_cast<std::uint32_t>(data.size());
  submit_spm(offset, std::make_shared<Access>(Access{kSpmBase + offset, size, AccessKind::write, true,
                                                     std::move(data),
                                                     [d = std::move(done)](Cycle c, std::span<const std::uint8_t>) {
                                                       if (d) d(c);
                                                     }}));
}

void Hierarchy::submit_sync(AccessPtr a) {
  const Region& r = image_.region_of(a->addr, std::max<std::uint32_t>(a->size, 1));
  if (r.kind == RegionKind::spm) {
    const std::uint64_t offset = a->addr - r.base;
    submit_spm(offset, std::move(a));
    return;
  }
  const std::uint32_t line_bytes = cfg_.l1.line_bytes;
  if (a->size == 0 || a->size > line_bytes || (a->addr % line_bytes) + a->size > line_bytes) {
    throw SimFault(fmt::format("synchronous access [{:#x}, +{}) must be nonempty and stay within one {}-byte line",
                               a->addr, a->size, line_bytes));
  }
  const std::uint64_t line = a->addr / line_bytes;
  if (l1_.access(line)) {
    ++stats_.l1_hits;
    sim_.schedule(cfg_.l1.hit_delay_cycles, [this, a] { finish(a); });
    return;
  }
  ++stats_.l1_misses;
  l1_miss(line, std::move(a));
}

void Hierarchy::l1_miss(std::uint64_t line, AccessPtr a) {
  if (auto it = l1_pending_.find(line); it != l1_pending_.end()) {
    ++stats_.mshr_merges;
    it->second.push_back(std::move(a));
    return;
  }
  l1_mshr_.acquire([this, line, a] { sim_.schedule(0, [this, line, a] { on_l1_mshr(line, a); }); });
}

void Hierarchy::on_l1_mshr(std::uint64_t line, AccessPtr a) {
  // The line may have been filled or become pending while this access waited.
  if (l1_.access(line)) {
    l1_mshr_.release();
    sim_.schedule(cfg_.l1.hit_delay_cycles, [this, a] { finish(a); });
    return;
  }
  if (auto it = l1_pending_.find(line); it != l1_pending_.end()) {
    l1_mshr_.release();
    ++stats_.mshr_merges;
    it->second.push_back(std::move(a));
    return;
  }
  l1_pending_[line].push_back(std::move(a));
  sim_.schedule(cfg_.l1.hit_delay_cycles, [this, line] { l2_lookup(line); });
}

void Hierarchy::l2_lookup(std::uint64_t line) {
  if (l2_.access(line)) {
    ++stats_.l2_hits;
    sim_.schedule(cfg_.l2.hit_delay_cycles, [this, line] { fill_l1(line); });
    return;
  }
  ++stats_.l2_misses;
  l2_miss(line);
}

void Hierarchy::l2_miss(std::uint64_t line) {
  if (auto it = l2_pending_.find(line); it != l2_pending_.end()) {
    ++stats_.mshr_merges;
    it->second.l1_waiting = true;
    return;
  }
  l2_mshr_.acquire([this, line] { sim_.schedule(0, [this, line] { on_l2_mshr(line); }); });
}

void Hierarchy::on_l2_mshr(std::uint64_t line) {
  if (l2_.access(line)) {
    l2_mshr_.release();
    sim_.schedule(cfg_.l2.hit_delay_cycles, [this, line] { fill_l1(line); });
    return;
  }
  if (auto it = l2_pending_.find(line); it != l2_pending_.end()) {
    l2_mshr_.release();
    ++stats_.mshr_merges;
    it->second.l1_waiting = true;
    return;
  }
  l2_pending_[line] = L2Pending{true};
  if (cfg_.stream_prefetcher) maybe_prefetch(line);
  sim_.schedule(cfg_.l2.hit_delay_cycles, [this, line] { memory_fetch(line); });
}

void Hierarchy::maybe_prefetch(std::uint64_t line) {
  const bool stream = std::find(miss_history_.begin(), miss_history_.end(), line - 1) != miss_history_.end();
  miss_history_.push_back(line);
  if (miss_history_.size() > cfg_.prefetch_history) miss_history_.pop_front();
  if (!stream) return;
  const std::uint32_t line_bytes = cfg_.l2.line_bytes;
  const auto home = image_.kind_of(line * line_bytes);
  for (std::uint32_t d = 1; d <= cfg_.prefetch_degree; ++d) {
    const std::uint64_t target = line + d;
    if (l2_.probe(target) || l2_pending_.count(target) != 0) continue;
    if (image_.kind_of(target * line_bytes) != home) break;
    if (!l2_mshr_.try_acquire()) {
      stats_.prefetches_dropped += cfg_.prefetch_degree - d + 1;
      break;
    }
    ++stats_.prefetches_issued;
    l2_pending_[target] = L2Pending{false};
    sim_.schedule(cfg_.l2.hit_delay_cycles, [this, target] { memory_fetch(target); });
  }
}

void Hierarchy::memory_fetch(std::uint64_t line) {
  const std::uint32_t line_bytes = cfg_.l2.line_bytes;
  const Region& r = image_.region_of(line * line_bytes, line_bytes);
  if (r.kind == RegionKind::far) {
    ++stats_.far_fetches;
    sim_.record_inflight_delta(+1);
    const Cycle done = link_.reserve(sim_.now(), line_bytes);
    sim_.schedule_at(done, [this, line] { on_memory_fill(line, true); });
  } else {
    ++stats_.dram_fetches;
    sim_.schedule(dram_cycles_, [this, line] { on_memory_fill(line, false); });
  }
}

void Hierarchy::on_memory_fill(std::uint64_t line, bool far) {
  if (far) sim_.record_inflight_delta(-1);
  l2_.fill(line);
  auto it = l2_pending_.find(line);
  if (it == l2_pending_.end()) throw InvariantViolation(fmt::format("L2 fill for line {:#x} with no pending miss", line));
  const bool l1_waiting = it->second.l1_waiting;
  l2_pending_.erase(it);
  l2_mshr_.release();
  if (l1_waiting) fill_l1(line);
}

void Hierarchy::fill_l1(std::uint64_t line) {
  l1_.fill(line);
  auto it = l1_pending_.find(line);
  if (it == l1_pending_.end()) return;
  std::vector<AccessPtr> waiters = std::move(it->second);
  l1_pending_.erase(it);
  l1_mshr_.release();
  for (const AccessPtr& a : waiters) finish(a);
}

void Hierarchy::finish(const AccessPtr& a) {
  if (!a->functional) {
    a->done(sim_.now(), {});
    return;
  }
  if (a->kind == AccessKind::write) {
    image_.write(a->addr, a->data);
    a->done(sim_.now(), {});
  } else {
    a->data.resize(a->size);
    image_.read(a->addr, a->data);
    a->done(sim_.now(), a->data);
  }
}

void Hierarchy::submit_spm(std::uint64_t offset, AccessPtr a) {
  if (!spm_.in_range(offset, a->size)) {
    throw SimFault(fmt::format("SPM access [{:#x}, +{}) outside {}-byte scratchpad", offset, a->size, spm_.size()));
  }
  ++stats_.spm_accesses;
  sim_.schedule(cfg_.spm_delay_cycles, [this, offset, a] { finish_spm(offset, a); });
}

void Hierarchy::finish_spm(std::uint64_t offset, const AccessPtr& a) {
  if (!a->functional) {
    a->done(sim_.now(), {});
  } else if (a->kind == AccessKind::write) {
    spm_.write(offset, a->data);
    a->done(sim_.now(), {});
  } else {
    a->data.resize(a->size);
    spm_.read(offset, a->data);
    a->done(sim_.now(), a->data);
  }
}

void Hierarchy::submit_far(AccessPtr a) {
  if (a->size == 0) throw SimFault(fmt::format("far request at {:#x} has zero size", a->addr));
  const Region& r = image_.region_of(a->addr, a->size);
  if (r.kind != RegionKind::far) {
    throw SimFault(fmt::format("far request to {:#x} targets the {} region", a->addr, to_string(r.kind)));
  }
  ++stats_.far_requests;
  const Cycle done = link_.reserve(sim_.now(), a->size);
  sim_.schedule_at(done, [this, a] { finish(a); });
}

}  // namespace amusim::mem
