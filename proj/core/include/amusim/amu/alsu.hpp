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

#include "amusim/amu/asmc.hpp"
#include "amusim/amu/list_vector.hpp"
#include "amusim/amu/types.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::amu {

enum class AllocStatus : std::uint8_t { ok, failed, stall };

struct AllocResult {
  AllocStatus status;
  RequestId id;
  std::uint32_t latency;
};

struct GetfinResult {
  RequestId id;
  std::uint32_t latency;
};

/// Snapshot of a batch fetched from the ASMC by a not-yet-committed alloc.
struct UncommittedIdRegister {
  bool occupied = false;
  /// Owner was squashed; the snapshot is the only copy of its unpopped IDs.
  bool orphan = false;
  Seq owner = 0;
  std::uint64_t fetch_order = 0;
  ListVectorRegister saved;
};

/// Pipeline-side half of the AMU. Tags are instruction sequence numbers;
/// commit(t) and squash(t) follow program order.
class Alsu {
 public:
  Alsu(sim::Simulator& sim, Asmc& asmc, const AmuConfig& cfg, AmuStats& stats);
  Alsu(const Alsu&) = delete;
  Alsu& operator=(const Alsu&) = delete;

  void reset();

  AllocResult alloc(Seq tag);
  /// Buffers the request for delivery at commit. The caller validated it.
  void issue(Seq tag, const Request& req);
  void commit(Seq tag);
  void squash(Seq from);
  GetfinResult getfin();
  void release(RequestId id);

  void set_unstall_listener(std::function<void()> fn) { on_unstall_ = std::move(fn); }

  /// Adds one count per ID held in ALSU-side state (free-side registers,
  /// uncommitted history, orphan UIRs, in-transit, finished register,
  /// delivered, recycle buffer). `where` gets a label per ID for diagnostics.
  void tally(std::vector<std::uint32_t>& counts, std::vector<const char*>& where) const;

  bool has_uncommitted() const { return !history_.empty() || !store_buffer_.empty(); }
  std::size_t delivered_count() const { return delivered_count_; }
  std::size_t in_transit_count() const { return in_transit_.size(); }
  const ListVectorRegister& free_register() const { return live_; }
  const ListVectorRegister& finished_register() const { return fin_; }
  const std::vector<UncommittedIdRegister>& uncommitted_registers() const { return uirs_; }

 private:
  struct HistoryEntry {
    Seq tag;
    RequestId id;
    ListVectorRegister before;
  };
  struct Buffered {
    Seq tag;
    Request req;
  };

  std::uint32_t round_trip(bool reg_miss) const;
  void flush_recycle();
  void deliver(const Request& req);

  sim::Simulator& sim_;
  Asmc& asmc_;
  AmuConfig cfg_;
  AmuStats& stats_;

  ListVectorRegister live_;
  std::deque<HistoryEntry> history_;
  std::vector<UncommittedIdRegister> uirs_;
  std::uint64_t fetch_counter_ = 0;
  std::deque<Buffered> store_buffer_;
  std::vector<RequestId> in_transit_;
  ListVectorRegister fin_;
  std::vector<std::uint8_t> delivered_;
  std::size_t delivered_count_ = 0;
  std::vector<RequestId> recycle_;
  bool stalled_ = false;
  std::function<void()> on_unstall_;
};

}  // namespace amusim::amu
