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

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "amusim/amu/alsu.hpp"
#include "amusim/common.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::cpu {

enum class InstKind : std::uint8_t { compute, load, store, aload, astore, getfin, cfg };
/// Who the instruction works for; cycles are attributed by the ROB head.
enum class Category : std::uint8_t { app, runtime, guard };
inline constexpr std::size_t kCategories = 4;  // app, runtime, guard, idle

std::string_view to_string(InstKind kind);

inline constexpr Seq kNoDep = ~0ULL;
inline constexpr std::size_t kMaxDeps = 4;

struct InstRecord {
  InstKind kind = InstKind::compute;
  Category category = Category::app;
  std::uint32_t latency = 1;
  Addr addr = 0;
  std::uint32_t size = 0;
  std::array<Seq, kMaxDeps> deps{kNoDep, kNoDep, kNoDep, kNoDep};
  /// Set by the source at fetch for aload/astore; 0 when the alloc failed.
  std::uint16_t ami_id = 0;
  bool alloc_failed = false;

  /// Appends a dependency; kNoDep and duplicates are ignored.
  void add_dep(Seq s);
  std::size_t dep_count() const;

  static InstRecord compute(std::uint32_t latency, std::initializer_list<Seq> deps = {},
                            Category cat = Category::app);
  static InstRecord load(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps = {},
                         Category cat = Category::app);
  static InstRecord store(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps = {},
                          Category cat = Category::app);
};

enum class FetchStatus : std::uint8_t { ok, blocked, end };

struct FetchResult {
  FetchStatus status;
  InstRecord inst;
};

/// Supplies the dynamic instruction stream by sequence number. A squash
/// rewinds the core, which then refetches the same sequence numbers.
class InstSource {
 public:
  virtual ~InstSource() = default;
  virtual FetchResult fetch(Seq seq) = 0;
  virtual void on_complete(Seq /*seq*/, const InstRecord& /*inst*/, std::uint64_t /*result*/) {}
  virtual void on_commit(Seq /*seq*/, const InstRecord& /*inst*/) {}
  virtual void on_squash(Seq /*from*/) {}
  /// The source calls `wake` when a blocked fetch may now succeed.
  void set_wake(std::function<void()> wake) { wake_ = std::move(wake); }

 protected:
  void wake() const {
    if (wake_) wake_();
  }

 private:
  std::function<void()> wake_;
};

/// Core-to-AMU hooks for the instructions whose effects live in the AMU.
class AmiPort {
 public:
  virtual ~AmiPort() = default;
  virtual amu::GetfinResult getfin(Seq seq) = 0;
  virtual void commit(Seq seq, const InstRecord& inst) = 0;
  virtual void squash(Seq from) = 0;
};

struct CoreParams {
  std::uint32_t rob_entries = 512;
  std::uint32_t lsq_entries = 192;
  std::uint32_t issue_width = 6;
  std::uint32_t commit_width = 6;
  std::uint32_t coroutine_switch_cycles = 40;
  /// False holds aload/astore/getfin until they reach the ROB head.
  bool speculative_ami = true;
  double squash_probability = 0.0;
  std::uint32_t squash_max_depth = 16;
  /// 0 means no limit.
  std::uint64_t squash_limit = 0;
  /// Called after every injected squash (used for audits).
  std::function<void()> after_squash;

  void validate() const;
};

struct CoreStats {
  std::uint64_t committed = 0;
  std::uint64_t dispatched = 0;
  std::uint64_t squashes = 0;
  std::uint64_t squashed_instructions = 0;
  std::uint64_t fetch_blocked = 0;
  std::uint32_t peak_rob = 0;
  std::uint32_t peak_lsq = 0;
  /// app, runtime, guard, idle (empty ROB)
  std::array<Cycle, kCategories> cycles_by_category{};
};

struct InstTiming {
  Seq seq = 0;
  InstKind kind = InstKind::compute;
  Cycle dispatch = 0;
  Cycle start = 0;
  Cycle complete = 0;
  Cycle retire = 0;
};

/// Window-limited out-of-order core. Instructions hold a ROB entry from
/// dispatch to in-order retirement; loads and stores hold an LSQ entry until
/// their memory access completes, AMI instructions until retirement.
/// An instruction starts at max(dispatch + 1, completion of its inputs).
class Core {
 public:
  Core(sim::Simulator& sim, mem::Hierarchy* hier, InstSource& source, AmiPort* port, const CoreParams& params);
  Core(const Core&) = delete;
  Core& operator=(const Core&) = delete;

  void start();

  bool finished() const { return finished_; }
  Cycle finish_cycle() const { return finish_cycle_; }
  const CoreStats& stats() const { return stats_; }
  const CoreParams& params() const { return params_; }
  std::uint32_t rob_occupancy() const { return static_cast<std::uint32_t>(next_seq_ - head_seq_); }
  std::uint32_t lsq_occupancy() const { return lsq_used_; }
  Seq retired_count() const { return head_seq_; }

  void enable_timeline(bool on) { timeline_on_ = on; }
  const std::vector<InstTiming>& timeline() const { return timeline_; }

  /// Rewinds the window to `from` (must be uncommitted). Exposed for tests;
  /// normal runs squash only through random injection.
  void squash_from(Seq from);

 private:
  struct Entry {
    Seq seq = 0;
    std::uint64_t uid = 0;
    InstRecord inst;
    Cycle ready_at = 0;
    Cycle done_at = 0;
    std::uint64_t result = 0;
    std::uint8_t pending = 0;
    bool done = false;
    bool waiting_head = false;
    bool holds_lsq = false;
    std::vector<std::pair<Seq, std::uint64_t>> consumers;
  };

  Entry* lookup(Seq seq, std::uint64_t uid);
  Entry& head() { return rob_[head_seq_ % rob_.size()]; }
  void request_tick(Cycle at);
  void tick();
  void attribute(Cycle now);
  void retire(Entry& e);
  void dispatch(const InstRecord& inst);
  void try_start(Entry& e);
  void schedule_start(Entry& e, Cycle at);
  void execute(Entry& e);
  void complete_at(Entry& e, Cycle at);
  void on_done(Seq seq, std::uint64_t uid);
  void maybe_inject_squash();
  bool must_wait_head(const InstRecord& inst) const;
  InstTiming& timing(Seq seq);

  sim::Simulator& sim_;
  mem::Hierarchy* hier_;
  InstSource& source_;
  AmiPort* port_;
  CoreParams params_;

  std::vector<Entry> rob_;
  Seq head_seq_ = 0;
  Seq next_seq_ = 0;
  std::uint32_t lsq_used_ = 0;
  std::uint64_t uid_counter_ = 0;
  Seq barrier_plus1_ = 0;

  std::optional<InstRecord> pending_fetch_;
  bool ended_ = false;
  bool finished_ = false;
  Cycle finish_cycle_ = 0;

  bool tick_pending_ = false;
  Cycle tick_at_ = 0;
  std::uint64_t tick_token_ = 0;
  bool ticked_ = false;
  Cycle last_tick_ = 0;

  std::size_t current_category_ = 3;
  Cycle last_attribution_ = 0;

  bool timeline_on_ = false;
  std::vector<InstTiming> timeline_;
  CoreStats stats_;
};

struct StreamOptions {
  CoreParams core;
  mem::HierarchyConfig memory;
  double frequency_ghz = 3.0;
  bool timeline = false;
};

struct StreamResult {
  Cycle cycles = 0;
  double ipc = 0.0;
  double mlp = 0.0;
  CoreStats stats;
  std::vector<InstTiming> timeline;
};

/// Runs a fixed instruction vector on a fresh core and memory system.
/// Addresses must fall in the default local or far windows. Throws SimFault
/// if a dependency does not precede its instruction.
StreamResult execute_stream(const std::vector<InstRecord>& stream, const StreamOptions& opts = {});

}  // namespace amusim::cpu
