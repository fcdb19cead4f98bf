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

#include <coroutine>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "amusim/amu/amu.hpp"
#include "amusim/cpu/core.hpp"
#include "amusim/rt/emitter.hpp"
#include "amusim/rt/guard_table.hpp"
#include "amusim/rt/spm_allocator.hpp"
#include "amusim/rt/task.hpp"

namespace amusim::rt {

struct RuntimeConfig {
  std::uint32_t queue_length = 256;
  /// Size of one SPM data slot handed out by acquire_slot.
  std::uint32_t slot_bytes = 64;
  std::uint32_t switch_cycles = 40;
  GuardConfig guard;

  void validate() const;
};

struct RuntimeStats {
  std::uint64_t tasks_spawned = 0;
  std::uint64_t tasks_completed = 0;
  std::uint64_t switches = 0;
  std::uint64_t suspensions = 0;
  std::uint64_t getfin_calls = 0;
  std::uint64_t getfin_empty = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t idle_waits = 0;
  std::uint64_t alloc_failures = 0;
  /// Distinct requests that saw at least one failed alloc.
  std::uint64_t requests_delayed = 0;
  std::uint64_t retries_issued = 0;
  std::uint64_t detached_stores = 0;
  std::uint64_t guard_acquires = 0;
  std::uint64_t guard_contended = 0;
  std::uint64_t guard_handoffs = 0;
  std::uint64_t slot_waits = 0;
};

/// One asynchronous transfer between an SPM offset and far memory.
struct Transfer {
  amu::RequestKind kind = amu::RequestKind::aload;
  std::uint32_t spm_addr = 0;
  Addr mem_addr = 0;
  std::uint32_t bytes = 8;
};

/// Coroutine scheduler running on the simulated core.
///
/// Task code runs on the host when the core needs instructions: it performs
/// its functional work immediately and emits the matching timing
/// instructions. The event loop itself is emitted too: getfin, a load of the
/// waiter table entry for the returned ID, and a fixed-cost switch before
/// each resumption. ID allocation and request issue happen when the core
/// fetches the aload/astore, in program order, so a squash replays them and
/// must obtain the same IDs.
class Runtime final : public cpu::InstSource, public cpu::AmiPort {
 public:
  Runtime(sim::Simulator& sim, amu::Amu& amu, mem::MemoryImage& image, const RuntimeConfig& cfg);
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  void spawn(Task task);

  // ---- task-side API (valid only while a task runs) ----
  Emitter& em() { return em_; }
  mem::MemoryImage& image() { return image_; }
  mem::Spm& spm() { return amu_.hierarchy().spm(); }

  class AmiAwaiter {
   public:
    AmiAwaiter(Runtime& rt, std::vector<Transfer> ts) : rt_(rt), ts_(std::move(ts)) {}
    bool await_ready() const noexcept { return ts_.empty(); }
    void await_suspend(std::coroutine_handle<>) { rt_.suspend_on(ts_); }
    void await_resume() const noexcept {}

   private:
    Runtime& rt_;
    std::vector<Transfer> ts_;
  };

  class SlotAwaiter {
   public:
    explicit SlotAwaiter(Runtime& rt) : rt_(rt) {}
    bool await_ready() { return rt_.slots_.try_alloc(offset_); }
    void await_suspend(std::coroutine_handle<>) { rt_.wait_for_slot(); }
    std::uint32_t await_resume() { return ready_path() ? offset_ : rt_.take_handed_slot(); }

   private:
    bool ready_path() const { return offset_ != kNone; }
    static constexpr std::uint32_t kNone = ~0U;
    Runtime& rt_;
    std::uint32_t offset_ = kNone;
  };

  class GuardAwaiter {
   public:
    GuardAwaiter(Runtime& rt, Addr addr) : rt_(rt), addr_(addr) {}
    bool await_ready() { return rt_.try_start_access(addr_); }
    void await_suspend(std::coroutine_handle<>) {}
    void await_resume() const noexcept {}

   private:
    Runtime& rt_;
    Addr addr_;
  };

  /// Suspends until the loaded bytes are in the SPM. Retries on ID exhaustion.
  AmiAwaiter aload(std::uint32_t spm_addr, Addr mem_addr, std::uint32_t bytes);
  /// Suspends until the far write is complete.
  AmiAwaiter astore(std::uint32_t spm_addr, Addr mem_addr, std::uint32_t bytes);
  /// Suspends until every transfer is complete.
  AmiAwaiter transfer_all(std::vector<Transfer> ts);
  /// Issues a store nobody waits for; `slot` is returned to the allocator
  /// when the store completes.
  void astore_detached(std::uint32_t slot, Addr mem_addr, std::uint32_t bytes);

  SlotAwaiter acquire_slot() { return SlotAwaiter(*this); }
  void release_slot(std::uint32_t slot);

  /// Guarded section on `addr`: waits FIFO behind the current holder.
  GuardAwaiter start_access(Addr addr) { return GuardAwaiter(*this, addr); }
  void end_access(Addr addr);

  /// Emits a load/store of SPM bytes (timing only).
  Seq spm_load(std::uint32_t offset, std::uint32_t size, std::initializer_list<Seq> deps = {});
  Seq spm_store(std::uint32_t offset, std::uint32_t size, std::initializer_list<Seq> deps = {});

  // ---- status ----
  bool finished() const;
  std::uint32_t pending_requests() const { return pending_ami_; }
  const RuntimeStats& stats() const { return stats_; }
  const RuntimeConfig& config() const { return cfg_; }
  const AddressGuardTable& guards() const { return guard_; }
  const SpmAllocator& slots() const { return slots_; }
  std::string dump() const;

  // ---- InstSource ----
  cpu::FetchResult fetch(Seq seq) override;
  void on_complete(Seq seq, const cpu::InstRecord& inst, std::uint64_t result) override;
  void on_commit(Seq seq, const cpu::InstRecord& inst) override;

  // ---- AmiPort ----
  amu::GetfinResult getfin(Seq seq) override;
  void commit(Seq seq, const cpu::InstRecord& inst) override;
  void squash(Seq from) override;

 private:
  enum class TaskState : std::uint8_t { fresh, running, waiting_ids, waiting_guard, waiting_slot, ready, done };
  struct TaskSlot {
    Task task;
    TaskState state = TaskState::fresh;
    std::uint32_t remaining = 0;
    std::vector<amu::RequestId> held;
    std::uint32_t handed_slot = 0;
  };
  struct Waiter {
    std::uint32_t task = kNoTask;
    bool detached = false;
    std::uint32_t slot = 0;
  };
  struct Retry {
    AmiOp op;
    std::uint64_t turn = 0;
  };
  enum class Gen : std::uint8_t { emitted, blocked, end };

  cpu::FetchResult serve(Seq seq);
  Gen generate();
  void resume(std::uint32_t t);
  void emit_ami(const AmiOp& op, std::uint32_t bytes);
  AmiOp make_op(const Transfer& t, std::uint32_t task, bool detached) const;
  void suspend_on(const std::vector<Transfer>& ts);
  void wait_for_slot();
  std::uint32_t take_handed_slot();
  bool try_start_access(Addr addr);
  Seq emit_probes(const AddressGuardTable::Lookup& l);
  void deliver(amu::RequestId id);
  std::uint32_t running() const;

  sim::Simulator& sim_;
  amu::Amu& amu_;
  mem::MemoryImage& image_;
  RuntimeConfig cfg_;
  InstBuffer buf_;
  Emitter em_;
  SpmAllocator slots_;
  AddressGuardTable guard_;
  Addr waiter_table_;

  std::vector<TaskSlot> tasks_;
  std::uint32_t current_ = kNoTask;
  std::uint64_t tasks_done_ = 0;
  std::vector<Waiter> waiters_;
  std::deque<std::uint32_t> fresh_;
  std::deque<std::uint32_t> ready_;
  std::deque<std::pair<std::uint32_t, amu::RequestId>> delivered_;
  std::deque<std::uint32_t> slot_waiters_;
  std::deque<Retry> retries_;
  std::optional<std::uint32_t> pending_resume_;
  std::uint32_t emitted_granularity_ = 0;
  std::uint32_t pending_ami_ = 0;

  std::optional<Seq> getfin_seq_;
  std::optional<Seq> waiter_load_seq_;
  std::uint32_t waiter_load_task_ = kNoTask;
  bool idle_wait_ = false;
  std::uint64_t finishes_ = 0;
  std::uint64_t finish_snapshot_ = 0;
  std::uint64_t getfin_turns_ = 0;

  RuntimeStats stats_;
};

}  // namespace amusim::rt
