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
#include <functional>
#include <random>
#include <vector>

#include "amusim/common.hpp"
#include "amusim/sim/stats.hpp"

namespace amusim::sim {

using EventId = std::uint64_t;
using Callback = std::function<void()>;

inline constexpr Cycle kDefaultCycleCap = 10'000'000'000ULL;

/// Cycle counter plus the ns <-> cycle conversion for one clock domain.
struct SimClock {
  Cycle now = 0;
  double frequency_ghz = 3.0;

  /// cycles = round(ns * frequency_ghz)
  Cycle ns_to_cycles(double ns) const;
  double cycles_to_ns(Cycle cycles) const { return static_cast<double>(cycles) / frequency_ghz; }
};

/// One fired event, as recorded when event logging is on.
struct EventLogEntry {
  Cycle fire_cycle;
  std::uint64_t sequence;
  std::uint32_t tag;

  friend bool operator==(const EventLogEntry&, const EventLogEntry&) = default;
};

/// Single-threaded discrete-event kernel. Events are ordered by
/// (fire_cycle, sequence); sequence is the registration counter, so events
/// registered for the same cycle fire in registration order.
class Simulator {
 public:
  explicit Simulator(std::uint64_t seed = 1, double frequency_ghz = 3.0);

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  Cycle now() const { return clock_.now; }
  const SimClock& clock() const { return clock_; }
  Cycle ns_to_cycles(double ns) const { return clock_.ns_to_cycles(ns); }

  EventId schedule(Cycle delay, Callback cb, std::uint32_t tag = 0);
  EventId schedule_at(Cycle when, Callback cb, std::uint32_t tag = 0);

  /// Drains the queue. Returns the clock value at which the queue emptied.
  /// Throws SimFault when the next event lies beyond the cycle cap.
  Cycle run_until_idle();

  bool idle() const { return heap_.empty(); }
  std::size_t pending_events() const { return heap_.size(); }
  std::uint64_t fired_events() const { return fired_; }

  void set_cycle_cap(Cycle cap) { cycle_cap_ = cap; }
  Cycle cycle_cap() const { return cycle_cap_; }

  std::mt19937_64& rng() { return rng_; }
  std::uint64_t seed() const { return seed_; }

  StatsAccumulator& stats() { return stats_; }
  const StatsAccumulator& stats() const { return stats_; }

  /// Convenience wrapper: record_inflight_delta at the current clock.
  void record_inflight_delta(std::int64_t delta) { stats_.record_inflight_delta(clock_.now, delta); }

  void enable_event_log(bool on) { log_enabled_ = on; }
  const std::vector<EventLogEntry>& event_log() const { return log_; }

 private:
  struct HeapItem {
    Cycle when;
    std::uint64_t sequence;
    std::uint32_t slot;
    std::uint32_t tag;
  };
  struct Later {
    bool operator()(const HeapItem& a, const HeapItem& b) const {
      return a.when != b.when ? a.when > b.when : a.sequence > b.sequence;
    }
  };

  SimClock clock_;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t fired_ = 0;
  Cycle cycle_cap_ = kDefaultCycleCap;
  std::vector<HeapItem> heap_;
  std::vector<Callback> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  StatsAccumulator stats_;
  bool log_enabled_ = false;
  std::vector<EventLogEntry> log_;
};

}  // namespace amusim::sim
