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

#include "amusim/amu/asmc.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

namespace amusim::amu {

Asmc::Asmc(sim::Simulator& sim, mem::Hierarchy& hier, const AmuConfig& cfg, AmuStats& stats)
    : sim_(sim), hier_(hier), cfg_(cfg), stats_(stats) {}

void Asmc::configure(std::uint32_t queue_base, std::uint32_t queue_length) {
  if (active_ != 0) throw ConfigError("queue reconfigured with requests in flight");
  queue_base_ = queue_base;
  queue_length_ = queue_length;
  const std::uint64_t meta = metadata_bytes(queue_length);
  std::vector<std::uint8_t> zeros(meta, 0);
  hier_.spm().write(queue_base, zeros);
  free_ = Ring{queue_base + queue_length * kAmartEntryBytes, 0, 0, 0};
  finished_ = Ring{queue_base + queue_length * (kAmartEntryBytes + kRingSlotBytes), 0, 0, 0};
  for (std::uint32_t i = 1; i <= queue_length; ++i) ring_push(free_, make_id(i));
  issue_queue_.clear();
  next_chunk_.assign(queue_length + 1, 0);
  granularity_.assign(queue_length + 1, 0);
}

void Asmc::ring_push(Ring& r, RequestId id) {
  if (r.count >= queue_length_) throw InvariantViolation(fmt::format("ID ring overflow pushing {}", raw(id)));
  const std::uint32_t slot = (r.head + r.count) % queue_length_;
  hier_.spm().store<std::uint16_t>(r.base + slot * kRingSlotBytes, raw(id));
  // The register cache mirrors a prefix of the ring; a push extends it only
  // when the whole ring is cached.
  if (r.cached == r.count && r.cached < cfg_.register_cache_depth) ++r.cached;
  ++r.count;
}

RequestId Asmc::ring_pop(Ring& r) {
  const auto v = hier_.spm().load<std::uint16_t>(r.base + r.head * kRingSlotBytes);
  r.head = (r.head + 1) % queue_length_;
  --r.count;
  return make_id(v);
}

std::vector<RequestId> Asmc::ring_fetch(Ring& r, std::uint32_t max, bool& reg_miss) {
  const std::uint32_t n = std::min(max, r.count);
  reg_miss = n > r.cached;
  if (reg_miss) {
    ++stats_.register_cache_misses;
    r.cached = std::min(cfg_.register_cache_depth, r.count);
  }
  std::vector<RequestId> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(ring_pop(r));
  r.cached -= std::min(r.cached, n);
  return out;
}

std::vector<RequestId> Asmc::ring_contents(const Ring& r) const {
  std::vector<RequestId> out;
  for (std::uint32_t i = 0; i < r.count; ++i) {
    const std::uint32_t slot = (r.head + i) % queue_length_;
    out.push_back(make_id(hier_.spm().load<std::uint16_t>(r.base + slot * kRingSlotBytes)));
  }
  return out;
}

std::vector<RequestId> Asmc::fetch_free(std::uint32_t max, bool& reg_miss) { return ring_fetch(free_, max, reg_miss); }
std::vector<RequestId> Asmc::fetch_finished(std::uint32_t max, bool& reg_miss) {
  return ring_fetch(finished_, max, reg_miss);
}
void Asmc::push_free(RequestId id) { ring_push(free_, id); }
std::vector<RequestId> Asmc::free_ring() const { return ring_contents(free_); }
std::vector<RequestId> Asmc::finished_ring() const { return ring_contents(finished_); }

std::uint32_t Asmc::entry_offset(RequestId id) const {
  if (raw(id) == 0 || raw(id) > queue_length_) {
    throw InvariantViolation(fmt::format("request ID {} outside 1..{}", raw(id), queue_length_));
  }
  return queue_base_ + (raw(id) - 1u) * kAmartEntryBytes;
}

AmartEntry Asmc::read_entry(RequestId id) const {
  std::array<std::uint8_t, kAmartEntryBytes> b{};
  hier_.spm().read(entry_offset(id), b);
  AmartEntry e;
  e.id = id;
  for (int i = 7; i >= 0; --i) e.mem_addr = (e.mem_addr << 8) | b[i];
  e.spm_addr = b[8] | (b[9] << 8) | (b[10] << 16);
  e.status = static_cast<EntryStatus>(b[11] & 0x0f);
  e.kind = static_cast<RequestKind>(b[11] >> 4);
  e.total_subrequests = static_cast<std::uint16_t>(b[12] | (b[13] << 8));
  e.completed_subrequests = static_cast<std::uint16_t>(b[14] | (b[15] << 8));
  return e;
}

void Asmc::write_entry(const AmartEntry& e) {
  std::array<std::uint8_t, kAmartEntryBytes> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(e.mem_addr >> (8 * i));
  b[8] = static_cast<std::uint8_t>(e.spm_addr);
  b[9] = static_cast<std::uint8_t>(e.spm_addr >> 8);
  b[10] = static_cast<std::uint8_t>(e.spm_addr >> 16);
  b[11] = static_cast<std::uint8_t>(static_cast<std::uint8_t>(e.status) | (static_cast<std::uint8_t>(e.kind) << 4));
  b[12] = static_cast<std::uint8_t>(e.total_subrequests);
  b[13] = static_cast<std::uint8_t>(e.total_subrequests >> 8);
  b[14] = static_cast<std::uint8_t>(e.completed_subrequests);
  b[15] = static_cast<std::uint8_t>(e.completed_subrequests >> 8);
  hier_.spm().write(entry_offset(e.id), b);
}

void Asmc::accept(const Request& req) {
  AmartEntry e = read_entry(req.id);
  if (e.status == EntryStatus::issued || e.status == EntryStatus::in_flight) {
    throw InvariantViolation(fmt::format("request ID {} accepted while its AMART entry is {}", raw(req.id),
                                         to_string(e.status)));
  }
  e.mem_addr = req.mem_addr;
  e.spm_addr = req.spm_addr;
  e.kind = req.kind;
  e.status = EntryStatus::issued;
  e.total_subrequests = static_cast<std::uint16_t>(subrequest_count(req.granularity));
  e.completed_subrequests = 0;
  write_entry(e);
  next_chunk_[raw(req.id)] = 0;
  granularity_[raw(req.id)] = req.granularity;
  ++active_;
  ++stats_.requests_accepted;
  sim_.record_inflight_delta(+1);
  issue_queue_.push_back(req.id);
  schedule_issue();
}

void Asmc::schedule_issue() {
  if (issue_scheduled_ || issue_queue_.empty()) return;
  issue_scheduled_ = true;
  sim_.schedule_at(std::max(sim_.now(), next_issue_cycle_), [this] {
    issue_scheduled_ = false;
    issue_one();
    schedule_issue();
  });
}

void Asmc::issue_one() {
  const RequestId id = issue_queue_.front();
  AmartEntry e = read_entry(id);
  const std::uint32_t chunk = next_chunk_[raw(id)]++;
  const std::uint32_t g = granularity_[raw(id)];
  const std::uint32_t offset = chunk * kLineBytes;
  const std::uint32_t size = std::min(kLineBytes, g - offset);
  if (next_chunk_[raw(id)] == e.total_subrequests) issue_queue_.pop_front();
  if (e.status == EntryStatus::issued) {
    e.status = EntryStatus::in_flight;
    write_entry(e);
  }
  next_issue_cycle_ = sim_.now() + 1;
  ++stats_.subrequests_issued;
  if (e.kind == RequestKind::aload) {
    const std::uint32_t spm = e.spm_addr + offset;
    hier_.far_read(e.mem_addr + offset, size, [this, id, spm](Cycle, std::span<const std::uint8_t> data) {
      hier_.spm().write(spm, data);
      on_subresponse(id);
    });
  } else {
    // astore data is snapshotted from the SPM when the packet is serviced.
    std::vector<std::uint8_t> data(size);
    hier_.spm().read(e.spm_addr + offset, data);
    hier_.far_write(e.mem_addr + offset, std::move(data), [this, id](Cycle) { on_subresponse(id); });
  }
}

void Asmc::on_subresponse(RequestId id) {
  AmartEntry e = read_entry(id);
  if (e.status != EntryStatus::in_flight) {
    throw InvariantViolation(fmt::format("response for request ID {} whose entry is {}", raw(id), to_string(e.status)));
  }
  ++e.completed_subrequests;
  if (e.completed_subrequests == e.total_subrequests) e.status = EntryStatus::done;
  write_entry(e);
  if (e.status != EntryStatus::done) return;
  --active_;
  ++stats_.requests_completed;
  sim_.record_inflight_delta(-1);
  ring_push(finished_, id);
  if (on_finish_) on_finish_(id);
}

}  // namespace amusim::amu
