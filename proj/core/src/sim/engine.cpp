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

#include "amusim/sim/engine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace amusim::sim {

Cycle SimClock::ns_to_cycles(double ns) const {
  if (ns < 0.0) throw ConfigError(fmt::format("negative duration {} ns", ns));
  return static_cast<Cycle>(std::llround(ns * frequency_ghz));
}

Simulator::Simulator(std::uint64_t seed, double frequency_ghz) : seed_(seed), rng_(seed) {
  if (!(frequency_ghz > 0.0)) throw ConfigError("clock frequency must be positive");
  clock_.frequency_ghz = frequency_ghz;
}

EventId Simulator::schedule(Cycle delay, Callback cb, std::uint32_t tag) {
  return schedule_at(clock_.now + delay, std::move(cb), tag);
}

EventId Simulator::schedule_at(Cycle when, Callback cb, std::uint32_t tag) {
  if (when < clock_.now) {
    throw InvariantViolation(
        fmt::format("event scheduled for cycle {} while clock is at {}", when, clock_.now));
  }
  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
    slots_[slot] = std::move(cb);
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.push_back(std::move(cb));
  }
  const std::uint64_t seq = next_sequence_++;
  heap_.push_back(HeapItem{when, seq, slot, tag});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return seq;
}

Cycle Simulator::run_until_idle() {
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    const HeapItem item = heap_.back();
    heap_.pop_back();
    if (item.when > cycle_cap_) {
      throw SimFault(fmt::format(
          "livelock guard: next event at cycle {} exceeds cycle cap {} ({} events pending, {} fired)",
          item.when, cycle_cap_, heap_.size() + 1, fired_));
    }
    clock_.now = item.when;
    Callback cb = std::move(slots_[item.slot]);
    slots_[item.slot] = nullptr;
    free_slots_.push_back(item.slot);
    if (log_enabled_) log_.push_back(EventLogEntry{item.when, item.sequence, item.tag});
    ++fired_;
    cb();
  }
  stats_.finalize(std::max(stats_.busy_cycles(), clock_.now));
  return clock_.now;
}

}  // namespace amusim::sim
