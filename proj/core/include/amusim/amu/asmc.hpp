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
#include <vector>

#include "amusim/amu/types.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::amu {

struct Request {
  RequestId id;
  RequestKind kind;
  std::uint32_t spm_addr;
  Addr mem_addr;
  std::uint32_t granularity;
};

/// Decoded AMART entry. On-SPM encoding, 16 bytes:
///   [0, 8)   mem_addr
///   [8, 11)  spm_addr (24-bit)
///   [11]     status (low nibble) | kind (high nibble)
///   [12, 14) total sub-requests
///   [14, 16) completed sub-requests
struct AmartEntry {
  RequestId id = kNoRequest;
  Addr mem_addr = 0;
  std::uint32_t spm_addr = 0;
  RequestKind kind = RequestKind::aload;
  EntryStatus status = EntryStatus::idle;
  std::uint16_t total_subrequests = 0;
  std::uint16_t completed_subrequests = 0;
};

/// Number of line-sized sub-requests for a transfer of `granularity` bytes.
constexpr std::uint32_t subrequest_count(std::uint32_t granularity) {
  return (granularity + kLineBytes - 1) / kLineBytes;
}

/// Scratchpad memory controller: owns the metadata area in the SPM (AMART and
/// the free/finished rings), splits requests into line-sized far packets, and
/// moves data between far memory and the SPM.
class Asmc {
 public:
  Asmc(sim::Simulator& sim, mem::Hierarchy& hier, const AmuConfig& cfg, AmuStats& stats);
  Asmc(const Asmc&) = delete;
  Asmc& operator=(const Asmc&) = delete;

  /// Places the metadata at `queue_base`, fills the free ring with 1..Q and
  /// clears the finished ring and AMART.
  void configure(std::uint32_t queue_base, std::uint32_t queue_length);

  std::uint32_t queue_base() const { return queue_base_; }
  std::uint32_t queue_length() const { return queue_length_; }

  std::uint32_t free_count() const { return free_.count; }
  std::uint32_t finished_count() const { return finished_.count; }

  /// Pops up to `max` IDs. `reg_miss` reports whether the register cache had
  /// to be refilled from the SPM.
  std::vector<RequestId> fetch_free(std::uint32_t max, bool& reg_miss);
  std::vector<RequestId> fetch_finished(std::uint32_t max, bool& reg_miss);
  void push_free(RequestId id);

  /// Request arrival from the ALSU. The AMART entry must be idle or done.
  void accept(const Request& req);

  AmartEntry read_entry(RequestId id) const;
  /// Requests accepted and not yet done.
  std::uint32_t active() const { return active_; }

  std::vector<RequestId> free_ring() const;
  std::vector<RequestId> finished_ring() const;

  void set_finish_listener(std::function<void(RequestId)> fn) { on_finish_ = std::move(fn); }

 private:
  struct Ring {
    std::uint32_t base = 0;
    std::uint32_t head = 0;
    std::uint32_t count = 0;
    std::uint32_t cached = 0;
  };

  void ring_push(Ring& r, RequestId id);
  RequestId ring_pop(Ring& r);
  std::vector<RequestId> ring_fetch(Ring& r, std::uint32_t max, bool& reg_miss);
  std::vector<RequestId> ring_contents(const Ring& r) const;

  std::uint32_t entry_offset(RequestId id) const;
  void write_entry(const AmartEntry& e);
  void schedule_issue();
  void issue_one();
  void on_subresponse(RequestId id);

  sim::Simulator& sim_;
  mem::Hierarchy& hier_;
  AmuConfig cfg_;
  AmuStats& stats_;
  std::uint32_t queue_base_ = 0;
  std::uint32_t queue_length_ = 0;
  Ring free_;
  Ring finished_;
  std::uint32_t active_ = 0;
  // Controller-side sequencing state for requests being split.
  std::deque<RequestId> issue_queue_;
  std::vector<std::uint16_t> next_chunk_;
  std::vector<std::uint32_t> granularity_;
  bool issue_scheduled_ = false;
  Cycle next_issue_cycle_ = 0;
  std::function<void(RequestId)> on_finish_;
};

}  // namespace amusim::amu
