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

#include "amusim/amu/alsu.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace amusim::amu {

Alsu::Alsu(sim::Simulator& sim, Asmc& asmc, const AmuConfig& cfg, AmuStats& stats)
    : sim_(sim), asmc_(asmc), cfg_(cfg), stats_(stats) {
  reset();
}

void Alsu::reset() {
  live_.clear();
  history_.clear();
  uirs_.assign(cfg_.uncommitted_registers, UncommittedIdRegister{});
  store_buffer_.clear();
  in_transit_.clear();
  fin_.clear();
  delivered_.assign(asmc_.queue_length() + 1, 0);
  delivered_count_ = 0;
  recycle_.clear();
  stalled_ = false;
}

std::uint32_t Alsu::round_trip(bool reg_miss) const {
  return 2 * cfg_.hop_cycles + (reg_miss ? cfg_.register_cache_miss_cycles : 0);
}

void Alsu::flush_recycle() {
  if (recycle_.empty()) return;
  for (RequestId id : recycle_) asmc_.push_free(id);
  recycle_.clear();
  ++stats_.asmc_messages;
  ++stats_.recycle_flushes;
}

AllocResult Alsu::alloc(Seq tag) {
  std::uint32_t latency = 1;
  // A squashed refill restores the empty register; its IDs live on in the orphan UIR.
  const ListVectorRegister before = live_;
  if (live_.empty()) {
    UncommittedIdRegister* orphan = nullptr;
    UncommittedIdRegister* vacant = nullptr;
    for (auto& u : uirs_) {
      if (u.occupied && u.orphan && (!orphan || u.fetch_order < orphan->fetch_order)) orphan = &u;
      if (!u.occupied && !vacant) vacant = &u;
    }
    if (orphan) {
      // IDs fetched before a squash are reused before asking the ASMC again.
      live_ = orphan->saved;
      orphan->orphan = false;
      orphan->owner = tag;
      ++stats_.uir_reuses;
    } else if (vacant) {
      if (asmc_.free_count() == 0) flush_recycle();
      ++stats_.asmc_messages;
      bool reg_miss = false;
      const auto ids = asmc_.fetch_free(cfg_.list_capacity, reg_miss);
      latency = round_trip(reg_miss);
      if (ids.empty()) {
        ++stats_.alloc_failures;
        return AllocResult{AllocStatus::failed, kNoRequest, latency};
      }
      ++stats_.batch_fetches;
      live_.load(ids);
      *vacant = UncommittedIdRegister{true, false, tag, ++fetch_counter_, live_};
    } else {
      ++stats_.alloc_stalls;
      stalled_ = true;
      return AllocResult{AllocStatus::stall, kNoRequest, 0};
    }
  }
  HistoryEntry h{tag, kNoRequest, before};
  h.id = live_.pop();
  history_.push_back(h);
  ++stats_.ids_allocated;
  return AllocResult{AllocStatus::ok, h.id, latency};
}

void Alsu::issue(Seq tag, const Request& req) {
  if (history_.empty() || history_.back().tag != tag || history_.back().id != req.id) {
    throw InvariantViolation(fmt::format("issue of ID {} at tag {} does not follow its alloc", raw(req.id), tag));
  }
  store_buffer_.push_back(Buffered{tag, req});
}

void Alsu::deliver(const Request& req) {
  ++stats_.asmc_messages;
  in_transit_.push_back(req.id);
  sim_.schedule(cfg_.hop_cycles, [this, req] {
    auto it = std::find(in_transit_.begin(), in_transit_.end(), req.id);
    if (it == in_transit_.end()) throw InvariantViolation(fmt::format("ID {} lost in transit", raw(req.id)));
    in_transit_.erase(it);
    asmc_.accept(req);
  });
}

void Alsu::commit(Seq tag) {
  while (!history_.empty() && history_.front().tag <= tag) {
    const HistoryEntry h = history_.front();
    history_.pop_front();
    if (store_buffer_.empty() || store_buffer_.front().tag != h.tag) {
      throw InvariantViolation(fmt::format("committed alloc of ID {} has no buffered request", raw(h.id)));
    }
    deliver(store_buffer_.front().req);
    store_buffer_.pop_front();
  }
  bool freed = false;
  for (auto& u : uirs_) {
    if (u.occupied && !u.orphan && u.owner <= tag) {
      u = UncommittedIdRegister{};
      freed = true;
    }
  }
  if (freed && stalled_) {
    stalled_ = false;
    if (on_unstall_) on_unstall_();
  }
}

void Alsu::squash(Seq from) {
  ++stats_.squashes;
  auto first = std::find_if(history_.begin(), history_.end(), [from](const HistoryEntry& h) { return h.tag >= from; });
  if (first != history_.end()) {
    live_ = first->before;
    history_.erase(first, history_.end());
  }
  while (!store_buffer_.empty() && store_buffer_.back().tag >= from) store_buffer_.pop_back();
  for (auto& u : uirs_) {
    if (u.occupied && !u.orphan && u.owner >= from) u.orphan = true;
  }
  // A refill that stalled may now find an orphan to reuse.
  if (stalled_) {
    stalled_ = false;
    if (on_unstall_) on_unstall_();
  }
}

GetfinResult Alsu::getfin() {
  std::uint32_t latency = 1;
  if (fin_.empty()) {
    ++stats_.asmc_messages;
    bool reg_miss = false;
    const auto ids = asmc_.fetch_finished(cfg_.list_capacity, reg_miss);
    latency = round_trip(reg_miss);
    if (ids.empty()) {
      ++stats_.getfin_empty;
      return GetfinResult{kNoRequest, latency};
    }
    ++stats_.batch_fetches;
    fin_.load(ids);
  } else {
    ++stats_.getfin_local;
  }
  const RequestId id = fin_.pop();
  delivered_[raw(id)] = 1;
  ++delivered_count_;
  return GetfinResult{id, latency};
}

void Alsu::release(RequestId id) {
  if (raw(id) == 0 || raw(id) >= delivered_.size() || !delivered_[raw(id)]) {
    throw InvariantViolation(fmt::format("release of ID {} that was not delivered", raw(id)));
  }
  delivered_[raw(id)] = 0;
  --delivered_count_;
  recycle_.push_back(id);
  if (recycle_.size() >= cfg_.recycle_capacity) flush_recycle();
}

void Alsu::tally(std::vector<std::uint32_t>& counts, std::vector<const char*>& where) const {
  auto add = [&](RequestId id, const char* place) {
    const auto i = raw(id);
    if (i == 0 || i >= counts.size()) throw InvariantViolation(fmt::format("ID {} out of range in {}", i, place));
    ++counts[i];
    where[i] = place;
  };
  for (RequestId id : live_.contents()) add(id, "free register");
  for (const auto& h : history_) add(h.id, "uncommitted alloc");
  for (const auto& u : uirs_) {
    if (u.occupied && u.orphan) {
      for (RequestId id : u.saved.contents()) add(id, "orphan uncommitted register");
    }
  }
  for (RequestId id : in_transit_) add(id, "in transit");
  for (RequestId id : fin_.contents()) add(id, "finished register");
  for (std::size_t i = 1; i < delivered_.size(); ++i) {
    if (delivered_[i]) add(make_id(static_cast<std::uint32_t>(i)), "delivered");
  }
  for (RequestId id : recycle_) add(id, "recycle buffer");
}

}  // namespace amusim::amu
