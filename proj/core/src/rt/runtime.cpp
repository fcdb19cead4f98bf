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

#include "amusim/rt/runtime.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace amusim::rt {

using cpu::Category;
using cpu::FetchResult;
using cpu::FetchStatus;
using cpu::InstKind;
using cpu::InstRecord;

void RuntimeConfig::validate() const {
  if (queue_length < 1 || queue_length > 65535) throw ConfigError("queue_length must be in 1..65535");
  if (slot_bytes < 1) throw ConfigError("slot_bytes must be at least 1");
  guard.validate();
}

namespace {

std::uint32_t metadata_base(const amu::Amu& amu, std::uint32_t queue_length) {
  const std::uint64_t meta = amu::metadata_bytes(queue_length);
  if (meta >= amu.config().spm_bytes) {
    throw ConfigError(fmt::format("metadata for {} IDs ({} bytes) does not fit the {}-byte SPM", queue_length, meta,
                                  amu.config().spm_bytes));
  }
  return static_cast<std::uint32_t>(amu.config().spm_bytes - meta);
}

std::string_view to_string_state(int s) {
  static constexpr std::string_view names[] = {"fresh", "running", "waiting_ids", "waiting_guard",
                                               "waiting_slot", "ready", "done"};
  return names[s];
}

}  // namespace

Runtime::Runtime(sim::Simulator& sim, amu::Amu& amu, mem::MemoryImage& image, const RuntimeConfig& cfg)
    : sim_(sim),
      amu_(amu),
      image_(image),
      cfg_((cfg.validate(), cfg)),
      em_(buf_),
      slots_(0, metadata_base(amu, cfg.queue_length), cfg.slot_bytes),
      guard_(cfg.guard, image.allocate(mem::RegionKind::local, cfg.guard.footprint_bytes())),
      waiter_table_(image.allocate(mem::RegionKind::local, (std::uint64_t{cfg.queue_length} + 1) * 8)),
      waiters_(cfg.queue_length + 1) {
  // Metadata sits at the top of the SPM; the data slots take everything below.
  amu_.cfg_write(amu::CfgReg::queue_length, cfg_.queue_length);
  amu_.cfg_write(amu::CfgReg::queue_base, slots_.limit());
  {
    CategoryScope scope(em_, Category::runtime);
    InstRecord c;
    c.kind = InstKind::cfg;
    em_.emit(c);
    em_.emit(c);
  }
  amu_.set_finish_listener([this](amu::RequestId) {
    ++finishes_;
    if (idle_wait_) {
      idle_wait_ = false;
      wake();
    }
  });
  amu_.set_unstall_listener([this] { wake(); });
}

void Runtime::spawn(Task task) {
  if (!task.valid()) throw RuntimeFault("spawn of an empty task");
  TaskSlot slot;
  slot.task = std::move(task);
  tasks_.push_back(std::move(slot));
  fresh_.push_back(static_cast<std::uint32_t>(tasks_.size() - 1));
  ++stats_.tasks_spawned;
}

std::uint32_t Runtime::running() const {
  if (current_ == kNoTask) throw RuntimeFault("task API used outside a running task");
  return current_;
}

// ---------------------------------------------------------------------------
// Task-side API

AmiOp Runtime::make_op(const Transfer& t, std::uint32_t task, bool detached) const {
  AmiOp op;
  op.kind = t.kind == amu::RequestKind::aload ? AmiOp::Kind::aload : AmiOp::Kind::astore;
  op.spm_addr = t.spm_addr;
  op.mem_addr = t.mem_addr;
  op.value = t.bytes;
  op.task = task;
  op.detached = detached;
  return op;
}

void Runtime::emit_ami(const AmiOp& op, std::uint32_t bytes) {
  if (bytes != emitted_granularity_) {
    AmiOp cfg;
    cfg.kind = AmiOp::Kind::cfg;
    cfg.reg = amu::CfgReg::granularity;
    cfg.value = bytes;
    InstRecord c;
    c.kind = InstKind::cfg;
    em_.emit(c, cfg);
    emitted_granularity_ = bytes;
  }
  InstRecord r;
  r.kind = op.kind == AmiOp::Kind::aload ? InstKind::aload : InstKind::astore;
  r.addr = op.mem_addr;
  r.size = bytes;
  r.latency = 2;
  em_.emit(r, op);
}

Runtime::AmiAwaiter Runtime::aload(std::uint32_t spm_addr, Addr mem_addr, std::uint32_t bytes) {
  return AmiAwaiter(*this, {Transfer{amu::RequestKind::aload, spm_addr, mem_addr, bytes}});
}

Runtime::AmiAwaiter Runtime::astore(std::uint32_t spm_addr, Addr mem_addr, std::uint32_t bytes) {
  return AmiAwaiter(*this, {Transfer{amu::RequestKind::astore, spm_addr, mem_addr, bytes}});
}

Runtime::AmiAwaiter Runtime::transfer_all(std::vector<Transfer> ts) { return AmiAwaiter(*this, std::move(ts)); }

void Runtime::suspend_on(const std::vector<Transfer>& ts) {
  const std::uint32_t t = running();
  TaskSlot& s = tasks_[t];
  s.state = TaskState::waiting_ids;
  s.remaining = static_cast<std::uint32_t>(ts.size());
  ++stats_.suspensions;
  for (const Transfer& x : ts) emit_ami(make_op(x, t, false), x.bytes);
}

void Runtime::astore_detached(std::uint32_t slot, Addr mem_addr, std::uint32_t bytes) {
  running();
  ++stats_.detached_stores;
  const Transfer x{amu::RequestKind::astore, slot, mem_addr, bytes};
  emit_ami(make_op(x, kNoTask, true), bytes);
}

void Runtime::wait_for_slot() {
  const std::uint32_t t = running();
  tasks_[t].state = TaskState::waiting_slot;
  slot_waiters_.push_back(t);
  ++stats_.slot_waits;
  ++stats_.suspensions;
}

std::uint32_t Runtime::take_handed_slot() { return tasks_[running()].handed_slot; }

void Runtime::release_slot(std::uint32_t slot) {
  if (!slot_waiters_.empty()) {
    const std::uint32_t t = slot_waiters_.front();
    slot_waiters_.pop_front();
    tasks_[t].handed_slot = slot;
    tasks_[t].state = TaskState::ready;
    ready_.push_back(t);
    return;
  }
  slots_.free(slot);
}

Seq Runtime::emit_probes(const AddressGuardTable::Lookup& l) {
  std::vector<Seq> probes;
  for (Addr b : l.probes) probes.push_back(em_.load(b, 8));
  InstRecord decide = InstRecord::compute(1);
  for (Seq p : probes) decide.add_dep(p);
  return em_.emit(decide);
}

bool Runtime::try_start_access(Addr addr) {
  const std::uint32_t t = running();
  CategoryScope scope(em_, Category::guard);
  const auto l = guard_.lookup(addr);
  const Seq decide = emit_probes(l);
  ++stats_.guard_acquires;
  if (!l.held) {
    const Addr bucket = guard_.insert(addr);
    em_.store(bucket, 8, {decide});
    em_.set_context_dep(decide);
    return true;
  }
  guard_.waiters(addr).push_back(t);
  em_.store(l.probes.back(), 8, {decide});
  tasks_[t].state = TaskState::waiting_guard;
  ++stats_.guard_contended;
  ++stats_.suspensions;
  return false;
}

void Runtime::end_access(Addr addr) {
  running();
  CategoryScope scope(em_, Category::guard);
  const auto l = guard_.lookup(addr);
  const Seq decide = emit_probes(l);
  if (!l.held) throw RuntimeFault(fmt::format("end_access on {:#x} without a matching start_access", addr));
  auto& w = guard_.waiters(addr);
  if (!w.empty()) {
    // Ownership passes straight to the oldest waiter; the address stays held.
    const std::uint32_t next = w.front();
    w.pop_front();
    tasks_[next].state = TaskState::ready;
    ready_.push_back(next);
    em_.store(l.probes.back(), 8, {decide});
    ++stats_.guard_handoffs;
    return;
  }
  const Addr bucket = guard_.erase(addr);
  em_.store(bucket, 8, {decide});
}

Seq Runtime::spm_load(std::uint32_t offset, std::uint32_t size, std::initializer_list<Seq> deps) {
  return em_.load(mem::kSpmBase + offset, size, deps);
}

Seq Runtime::spm_store(std::uint32_t offset, std::uint32_t size, std::initializer_list<Seq> deps) {
  return em_.store(mem::kSpmBase + offset, size, deps);
}

// ---------------------------------------------------------------------------
// Event loop

bool Runtime::finished() const {
  return tasks_done_ == tasks_.size() && pending_ami_ == 0 && retries_.empty();
}

void Runtime::resume(std::uint32_t t) {
  TaskSlot& s = tasks_[t];
  em_.set_context_dep(cpu::kNoDep);
  Seq sw = 0;
  {
    CategoryScope scope(em_, Category::runtime);
    sw = em_.compute(cfg_.switch_cycles);
  }
  ++stats_.switches;
  for (amu::RequestId id : s.held) amu_.release(id);
  s.held.clear();
  s.state = TaskState::running;
  em_.set_context_dep(sw);
  current_ = t;
  try {
    s.task.resume();
  } catch (...) {
    current_ = kNoTask;
    em_.set_context_dep(cpu::kNoDep);
    throw;
  }
  current_ = kNoTask;
  em_.set_context_dep(cpu::kNoDep);
  if (s.task.done()) {
    s.state = TaskState::done;
    s.task = Task{};
    ++tasks_done_;
    ++stats_.tasks_completed;
  } else if (s.state == TaskState::running) {
    throw RuntimeFault(fmt::format("task {} suspended on something other than a runtime awaitable", t));
  }
}

Runtime::Gen Runtime::generate() {
  if (getfin_seq_ || waiter_load_seq_) return Gen::blocked;
  if (pending_resume_) {
    const std::uint32_t t = *pending_resume_;
    pending_resume_.reset();
    resume(t);
    return Gen::emitted;
  }
  if (!ready_.empty()) {
    const std::uint32_t t = ready_.front();
    ready_.pop_front();
    resume(t);
    return Gen::emitted;
  }
  if (!delivered_.empty()) {
    // Find the waiting task: the jump to its handle depends on this load.
    const auto [t, id] = delivered_.front();
    delivered_.pop_front();
    CategoryScope scope(em_, Category::runtime);
    em_.set_context_dep(cpu::kNoDep);
    waiter_load_task_ = t;
    waiter_load_seq_ = em_.load(waiter_table_ + std::uint64_t{amu::raw(id)} * 8, 8);
    return Gen::emitted;
  }
  if (!fresh_.empty()) {
    const std::uint32_t t = fresh_.front();
    fresh_.pop_front();
    resume(t);
    return Gen::emitted;
  }
  if (!retries_.empty() && retries_.front().turn < getfin_turns_) {
    const Retry r = retries_.front();
    retries_.pop_front();
    CategoryScope scope(em_, Category::runtime);
    em_.set_context_dep(cpu::kNoDep);
    emit_ami(r.op, static_cast<std::uint32_t>(r.op.value));
    ++stats_.retries_issued;
    return Gen::emitted;
  }
  if (finished()) return Gen::end;
  if (pending_ami_ > 0) {
    if (idle_wait_) return Gen::blocked;
    CategoryScope scope(em_, Category::runtime);
    em_.set_context_dep(cpu::kNoDep);
    InstRecord g;
    g.kind = InstKind::getfin;
    getfin_seq_ = em_.emit(g);
    return Gen::emitted;
  }
  if (!retries_.empty()) {
    // Nothing is outstanding, so every ID is on the free side.
    const Retry r = retries_.front();
    retries_.pop_front();
    CategoryScope scope(em_, Category::runtime);
    em_.set_context_dep(cpu::kNoDep);
    emit_ami(r.op, static_cast<std::uint32_t>(r.op.value));
    ++stats_.retries_issued;
    return Gen::emitted;
  }
  throw RuntimeFault("deadlock: no runnable task and no outstanding request\n" + dump());
}

FetchResult Runtime::fetch(Seq seq) {
  if (seq > buf_.end()) throw InvariantViolation(fmt::format("fetch of {} skips past {}", seq, buf_.end()));
  while (seq == buf_.end()) {
    switch (generate()) {
      case Gen::emitted: break;
      case Gen::blocked: return FetchResult{FetchStatus::blocked, {}};
      case Gen::end: return FetchResult{FetchStatus::end, {}};
    }
  }
  return serve(seq);
}

FetchResult Runtime::serve(Seq seq) {
  Emitted& e = buf_.at(seq);
  AmiOp& op = e.op;
  switch (op.kind) {
    case AmiOp::Kind::none:
      break;
    case AmiOp::Kind::cfg:
      amu_.cfg_write(op.reg, op.value);
      break;
    case AmiOp::Kind::aload:
    case AmiOp::Kind::astore: {
      const amu::AllocResult r = amu_.alloc(seq);
      if (r.status == amu::AllocStatus::stall) return FetchResult{FetchStatus::blocked, {}};
      const bool first = !op.fetched;
      op.fetched = true;
      if (r.status == amu::AllocStatus::failed) {
        if (!first && !op.failed) {
          throw InvariantViolation(fmt::format("replayed alloc at {} failed after succeeding", seq));
        }
        op.failed = true;
        e.inst.alloc_failed = true;
        e.inst.ami_id = 0;
        e.inst.latency = r.latency;
        if (first) {
          ++stats_.alloc_failures;
          if (!op.retried) ++stats_.requests_delayed;
          retries_.push_back(Retry{op, getfin_turns_});
          retries_.back().op.fetched = false;
          retries_.back().op.failed = false;
          retries_.back().op.retried = true;
        }
        break;
      }
      if (!first && (op.failed || op.id != r.id)) {
        throw InvariantViolation(fmt::format("replayed alloc at {} got ID {}, first fetch got {}", seq, amu::raw(r.id),
                                             amu::raw(op.id)));
      }
      amu_.issue(seq, op.kind == AmiOp::Kind::aload ? amu::RequestKind::aload : amu::RequestKind::astore, r.id,
                 op.spm_addr, op.mem_addr);
      e.inst.ami_id = amu::raw(r.id);
      e.inst.latency = r.latency + 1;
      if (first) {
        op.id = r.id;
        waiters_[amu::raw(r.id)] = Waiter{op.task, op.detached, op.spm_addr};
        ++pending_ami_;
      }
      break;
    }
  }
  return FetchResult{FetchStatus::ok, e.inst};
}

void Runtime::deliver(amu::RequestId id) {
  if (pending_ami_ == 0) throw InvariantViolation(fmt::format("ID {} delivered with nothing pending", amu::raw(id)));
  --pending_ami_;
  ++stats_.deliveries;
  const Waiter w = waiters_[amu::raw(id)];
  waiters_[amu::raw(id)] = Waiter{};
  if (w.detached) {
    amu_.release(id);
    release_slot(w.slot);
    return;
  }
  if (w.task == kNoTask) throw InvariantViolation(fmt::format("ID {} delivered with no waiter", amu::raw(id)));
  TaskSlot& s = tasks_[w.task];
  if (s.state != TaskState::waiting_ids || s.remaining == 0) {
    throw InvariantViolation(fmt::format("ID {} delivered to task {} that is not waiting on it", amu::raw(id), w.task));
  }
  s.held.push_back(id);
  if (--s.remaining == 0) {
    s.state = TaskState::ready;
    delivered_.emplace_back(w.task, id);
  }
}

void Runtime::on_complete(Seq seq, const InstRecord& inst, std::uint64_t result) {
  if (inst.kind == InstKind::getfin && getfin_seq_ && *getfin_seq_ == seq) {
    getfin_seq_.reset();
    ++getfin_turns_;
    if (result != 0) {
      deliver(amu::make_id(static_cast<std::uint32_t>(result)));
    } else if (finishes_ == finish_snapshot_) {
      // Nothing finished since the ASMC was asked; sleep until something does.
      idle_wait_ = true;
      ++stats_.idle_waits;
    }
    return;
  }
  if (waiter_load_seq_ && *waiter_load_seq_ == seq) {
    waiter_load_seq_.reset();
    pending_resume_ = waiter_load_task_;
    waiter_load_task_ = kNoTask;
  }
}

void Runtime::on_commit(Seq seq, const InstRecord& /*inst*/) { buf_.retire(seq); }

amu::GetfinResult Runtime::getfin(Seq /*seq*/) {
  finish_snapshot_ = finishes_;
  ++stats_.getfin_calls;
  const amu::GetfinResult r = amu_.getfin();
  if (r.id == amu::kNoRequest) ++stats_.getfin_empty;
  return r;
}

void Runtime::commit(Seq seq, const InstRecord& /*inst*/) { amu_.commit(seq); }

void Runtime::squash(Seq from) { amu_.squash(from); }

std::string Runtime::dump() const {
  std::string out = fmt::format("tasks={} done={} pending_requests={} retries={} guards_held={}\n", tasks_.size(),
                                tasks_done_, pending_ami_, retries_.size(), guard_.size());
  std::size_t shown = 0;
  for (std::size_t i = 0; i < tasks_.size() && shown < 32; ++i) {
    if (tasks_[i].state == TaskState::done) continue;
    out += fmt::format("  task {}: {} remaining={}\n", i, to_string_state(static_cast<int>(tasks_[i].state)),
                       tasks_[i].remaining);
    ++shown;
  }
  return out;
}

}  // namespace amusim::rt
