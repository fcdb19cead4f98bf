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

#include "amusim/cpu/core.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

namespace amusim::cpu {

std::string_view to_string(InstKind kind) {
  switch (kind) {
    case InstKind::compute: return "compute";
    case InstKind::load: return "load";
    case InstKind::store: return "store";
    case InstKind::aload: return "aload";
    case InstKind::astore: return "astore";
    case InstKind::getfin: return "getfin";
    case InstKind::cfg: return "cfg";
  }
  return "?";
}

void InstRecord::add_dep(Seq s) {
  if (s == kNoDep) return;
  for (Seq& d : deps) {
    if (d == s) return;
    if (d == kNoDep) {
      d = s;
      return;
    }
  }
  throw InvariantViolation(fmt::format("instruction has more than {} dependencies", kMaxDeps));
}

std::size_t InstRecord::dep_count() const {
  return static_cast<std::size_t>(std::count_if(deps.begin(), deps.end(), [](Seq d) { return d != kNoDep; }));
}

InstRecord InstRecord::compute(std::uint32_t latency, std::initializer_list<Seq> deps, Category cat) {
  InstRecord r;
  r.kind = InstKind::compute;
  r.latency = latency;
  r.category = cat;
  for (Seq d : deps) r.add_dep(d);
  return r;
}

InstRecord InstRecord::load(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps, Category cat) {
  InstRecord r;
  r.kind = InstKind::load;
  r.addr = addr;
  r.size = size;
  r.category = cat;
  for (Seq d : deps) r.add_dep(d);
  return r;
}

InstRecord InstRecord::store(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps, Category cat) {
  InstRecord r = load(addr, size, deps, cat);
  r.kind = InstKind::store;
  return r;
}

void CoreParams::validate() const {
  if (rob_entries < 1 || lsq_entries < 1 || issue_width < 1 || commit_width < 1) {
    throw ConfigError("core resource counts must be at least 1");
  }
  if (squash_probability < 0.0 || squash_probability > 1.0) throw ConfigError("squash_probability must be in [0, 1]");
  if (squash_max_depth < 1) throw ConfigError("squash_max_depth must be at least 1");
}

namespace {
bool is_memory(InstKind k) { return k == InstKind::load || k == InstKind::store; }
bool is_ami(InstKind k) { return k == InstKind::aload || k == InstKind::astore; }
bool needs_lsq(InstKind k) { return is_memory(k) || is_ami(k); }
}  // namespace

Core::Core(sim::Simulator& sim, mem::Hierarchy* hier, InstSource& source, AmiPort* port, const CoreParams& params)
    : sim_(sim), hier_(hier), source_(source), port_(port), params_((params.validate(), params)) {
  rob_.resize(params_.rob_entries);
  source_.set_wake([this] { request_tick(sim_.now()); });
}

void Core::start() {
  last_attribution_ = sim_.now();
  request_tick(sim_.now());
}

Core::Entry* Core::lookup(Seq seq, std::uint64_t uid) {
  if (seq < head_seq_ || seq >= next_seq_) return nullptr;
  Entry& e = rob_[seq % rob_.size()];
  return e.uid == uid ? &e : nullptr;
}

InstTiming& Core::timing(Seq seq) {
  if (timeline_.size() <= seq) timeline_.resize(seq + 1);
  return timeline_[seq];
}

void Core::request_tick(Cycle at) {
  if (finished_) return;
  at = std::max(at, sim_.now());
  if (ticked_) at = std::max(at, last_tick_ + 1);
  if (tick_pending_ && tick_at_ <= at) return;
  tick_pending_ = true;
  tick_at_ = at;
  const std::uint64_t token = ++tick_token_;
  sim_.schedule_at(at, [this, token] {
    if (token != tick_token_) return;
    tick_pending_ = false;
    tick();
  });
}

void Core::attribute(Cycle now) {
  stats_.cycles_by_category[current_category_] += now - last_attribution_;
  last_attribution_ = now;
}

bool Core::must_wait_head(const InstRecord& inst) const {
  return !params_.speculative_ami && (is_ami(inst.kind) || inst.kind == InstKind::getfin);
}

void Core::tick() {
  const Cycle now = sim_.now();
  ticked_ = true;
  last_tick_ = now;
  attribute(now);

  std::uint32_t retired = 0;
  while (retired < params_.commit_width && head_seq_ < next_seq_) {
    Entry& e = head();
    if (!e.done) break;
    retire(e);
    ++retired;
  }
  if (head_seq_ < next_seq_) {
    Entry& h = head();
    if (h.waiting_head) {
      h.waiting_head = false;
      schedule_start(h, std::max(now, h.ready_at));
    }
  }

  bool width_limited = false;
  std::uint32_t dispatched = 0;
  while (!ended_) {
    if (dispatched == params_.issue_width) {
      width_limited = true;
      break;
    }
    if (rob_occupancy() == params_.rob_entries) break;
    if (!pending_fetch_) {
      FetchResult r = source_.fetch(next_seq_);
      if (r.status == FetchStatus::blocked) {
        ++stats_.fetch_blocked;
        break;
      }
      if (r.status == FetchStatus::end) {
        ended_ = true;
        break;
      }
      // Fetch already performed the side effect, so nothing at or before it may be replayed.
      if (r.inst.kind == InstKind::getfin || r.inst.alloc_failed) barrier_plus1_ = next_seq_ + 1;
      pending_fetch_ = r.inst;
    }
    if (needs_lsq(pending_fetch_->kind) && lsq_used_ == params_.lsq_entries) break;
    dispatch(*pending_fetch_);
    pending_fetch_.reset();
    ++dispatched;
  }

  maybe_inject_squash();

  current_category_ = head_seq_ < next_seq_ ? static_cast<std::size_t>(head().inst.category) : 3;
  if (ended_ && head_seq_ == next_seq_) {
    finished_ = true;
    finish_cycle_ = now;
    return;
  }
  if (width_limited || (head_seq_ < next_seq_ && head().done)) request_tick(now + 1);
}

void Core::retire(Entry& e) {
  const Cycle now = sim_.now();
  if (is_ami(e.inst.kind)) {
    if (port_) port_->commit(e.seq, e.inst);
  }
  if (e.holds_lsq) {
    e.holds_lsq = false;
    --lsq_used_;
  }
  ++stats_.committed;
  sim_.stats().add_committed();
  if (timeline_on_) timing(e.seq).retire = now;
  const Seq seq = e.seq;
  ++head_seq_;
  source_.on_commit(seq, e.inst);
}

void Core::dispatch(const InstRecord& inst) {
  const Cycle now = sim_.now();
  const Seq seq = next_seq_++;
  Entry& e = rob_[seq % rob_.size()];
  e.seq = seq;
  e.uid = ++uid_counter_;
  e.inst = inst;
  e.ready_at = now + 1;
  e.done_at = 0;
  e.result = 0;
  e.pending = 0;
  e.done = false;
  e.waiting_head = false;
  e.holds_lsq = false;
  e.consumers.clear();
  for (Seq d : inst.deps) {
    if (d == kNoDep) continue;
    if (d >= seq) {
      throw SimFault(fmt::format("instruction {} depends on {}, which does not precede it", seq, d));
    }
    if (d < head_seq_) continue;
    Entry& p = rob_[d % rob_.size()];
    if (p.done) {
      e.ready_at = std::max(e.ready_at, p.done_at);
    } else {
      p.consumers.emplace_back(seq, e.uid);
      ++e.pending;
    }
  }
  if (needs_lsq(inst.kind)) {
    e.holds_lsq = true;
    ++lsq_used_;
    stats_.peak_lsq = std::max(stats_.peak_lsq, lsq_used_);
  }
  ++stats_.dispatched;
  stats_.peak_rob = std::max(stats_.peak_rob, rob_occupancy());
  if (timeline_on_) {
    InstTiming& t = timing(seq);
    t = InstTiming{seq, inst.kind, now, 0, 0, 0};
  }
  if (e.pending == 0) try_start(e);
}

void Core::try_start(Entry& e) {
  if (must_wait_head(e.inst) && e.seq != head_seq_) {
    e.waiting_head = true;
    return;
  }
  schedule_start(e, std::max(e.ready_at, sim_.now()));
}

void Core::schedule_start(Entry& e, Cycle at) {
  const Seq seq = e.seq;
  const std::uint64_t uid = e.uid;
  sim_.schedule_at(at, [this, seq, uid] {
    if (Entry* x = lookup(seq, uid)) execute(*x);
  });
}

void Core::execute(Entry& e) {
  const Cycle now = sim_.now();
  if (timeline_on_) timing(e.seq).start = now;
  switch (e.inst.kind) {
    case InstKind::compute:
    case InstKind::cfg:
      complete_at(e, now + e.inst.latency);
      return;
    case InstKind::load:
    case InstKind::store:
      if (hier_) {
        const Seq seq = e.seq;
        const std::uint64_t uid = e.uid;
        hier_->sync_access(e.inst.addr, e.inst.size,
                           e.inst.kind == InstKind::load ? mem::AccessKind::read : mem::AccessKind::write,
                           [this, seq, uid](Cycle) { on_done(seq, uid); });
      } else {
        complete_at(e, now + e.inst.latency);
      }
      return;
    case InstKind::aload:
    case InstKind::astore:
      complete_at(e, now + std::max<std::uint32_t>(1, e.inst.latency));
      return;
    case InstKind::getfin: {
      std::uint32_t latency = 1;
      if (port_) {
        const amu::GetfinResult r = port_->getfin(e.seq);
        e.result = amu::raw(r.id);
        latency = r.latency;
      }
      complete_at(e, now + latency);
      return;
    }
  }
}

void Core::complete_at(Entry& e, Cycle at) {
  const Seq seq = e.seq;
  const std::uint64_t uid = e.uid;
  sim_.schedule_at(at, [this, seq, uid] { on_done(seq, uid); });
}

void Core::on_done(Seq seq, std::uint64_t uid) {
  Entry* e = lookup(seq, uid);
  if (!e) return;
  const Cycle now = sim_.now();
  e->done = true;
  e->done_at = now;
  if (timeline_on_) timing(seq).complete = now;
  if (e->holds_lsq && is_memory(e->inst.kind)) {
    e->holds_lsq = false;
    --lsq_used_;
  }
  // Consumers may dispatch into the same ring slots only after retirement, so
  // the list is stable while we walk it.
  for (const auto& [cseq, cuid] : e->consumers) {
    Entry* c = lookup(cseq, cuid);
    if (!c) continue;
    c->ready_at = std::max(c->ready_at, now);
    if (--c->pending == 0) try_start(*c);
  }
  e->consumers.clear();
  source_.on_complete(seq, e->inst, e->result);
  request_tick(now);
}

void Core::maybe_inject_squash() {
  if (params_.squash_probability <= 0.0) return;
  if (params_.squash_limit != 0 && stats_.squashes >= params_.squash_limit) return;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(sim_.rng()) >= params_.squash_probability) return;
  std::uniform_int_distribution<std::uint32_t> pick(1, params_.squash_max_depth);
  const std::uint32_t depth = pick(sim_.rng());
  const Seq lo = std::max(head_seq_, barrier_plus1_);
  if (next_seq_ <= lo) return;
  const Seq from = next_seq_ - lo > depth ? next_seq_ - depth : lo;
  squash_from(from);
  if (params_.after_squash) params_.after_squash();
}

void Core::squash_from(Seq from) {
  if (from < head_seq_ || from > next_seq_) {
    throw InvariantViolation(fmt::format("squash from {} outside window [{}, {})", from, head_seq_, next_seq_));
  }
  if (from < barrier_plus1_) {
    throw InvariantViolation(fmt::format("squash from {} crosses a non-replayable instruction", from));
  }
  for (Seq s = from; s < next_seq_; ++s) {
    Entry& e = rob_[s % rob_.size()];
    if (e.holds_lsq) {
      e.holds_lsq = false;
      --lsq_used_;
    }
    e.uid = 0;
    e.consumers.clear();
    ++stats_.squashed_instructions;
  }
  next_seq_ = from;
  pending_fetch_.reset();
  ended_ = false;
  ++stats_.squashes;
  if (port_) port_->squash(from);
  source_.on_squash(from);
  request_tick(sim_.now() + 1);
}

namespace {

class VectorSource final : public InstSource {
 public:
  explicit VectorSource(const std::vector<InstRecord>& insts) : insts_(insts) {}
  FetchResult fetch(Seq seq) override {
    if (seq >= insts_.size()) return FetchResult{FetchStatus::end, {}};
    return FetchResult{FetchStatus::ok, insts_[seq]};
  }

 private:
  const std::vector<InstRecord>& insts_;
};

}  // namespace

StreamResult execute_stream(const std::vector<InstRecord>& stream, const StreamOptions& opts) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    for (Seq d : stream[i].deps) {
      if (d != kNoDep && d >= i) {
        throw SimFault(fmt::format("stream instruction {} depends on {}, which does not precede it", i, d));
      }
    }
  }
  sim::Simulator sim(1, opts.frequency_ghz);
  mem::MemoryImage image;
  image.map_region(mem::RegionKind::local, mem::kLocalBase, mem::kDefaultLocalBytes);
  image.map_region(mem::RegionKind::far, mem::kFarBase, mem::kDefaultFarBytes);
  if (opts.memory.spm_bytes > 0) image.map_region(mem::RegionKind::spm, mem::kSpmBase, opts.memory.spm_bytes);
  mem::Hierarchy hier(sim, image, opts.memory);
  VectorSource source(stream);
  Core core(sim, &hier, source, nullptr, opts.core);
  core.enable_timeline(opts.timeline);
  core.start();
  sim.run_until_idle();
  if (!core.finished()) throw SimFault("instruction stream did not drain");
  StreamResult out;
  out.cycles = core.finish_cycle();
  out.stats = core.stats();
  out.ipc = out.cycles ? static_cast<double>(out.stats.committed) / static_cast<double>(out.cycles) : 0.0;
  out.mlp = sim.stats().mlp();
  out.timeline = core.timeline();
  return out;
}

}  // namespace amusim::cpu
