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
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "amusim/common.hpp"

namespace amusim::sim {

/// Run-level statistics. The in-flight integral is advanced lazily: each
/// delta first credits `outstanding * (now - last_update)` and then applies
/// the change, so the integral is exact for event-driven updates.
class StatsAccumulator {
 public:
  void record_inflight_delta(Cycle now, std::int64_t delta);
  void add_committed(std::uint64_t n = 1) { committed_instructions_ += n; }

  /// Closes the integral at `now` and fixes busy_cycles = now.
  void finalize(Cycle now);

  /// Average outstanding far-memory requests; 0 before any busy cycle.
  double mlp() const;
  double ipc() const;

  Cycle busy_cycles() const { return busy_cycles_; }
  double inflight_integral() const { return inflight_integral_; }
  std::int64_t outstanding() const { return outstanding_; }
  std::int64_t peak_outstanding() const { return peak_outstanding_; }
  std::int64_t net_inflight_delta() const { return net_delta_; }
  std::uint64_t committed_instructions() const { return committed_instructions_; }

  void sample(std::string_view series, Cycle at, double value);
  const std::vector<std::pair<Cycle, double>>& series(std::string_view name) const;

  std::uint64_t& counter(std::string_view name);
  std::uint64_t counter_value(std::string_view name) const;
  const std::map<std::string, std::uint64_t, std::less<>>& counters() const { return counters_; }

 private:
  Cycle busy_cycles_ = 0;
  Cycle last_update_ = 0;
  double inflight_integral_ = 0.0;
  std::int64_t outstanding_ = 0;
  std::int64_t peak_outstanding_ = 0;
  std::int64_t net_delta_ = 0;
  std::uint64_t committed_instructions_ = 0;
  std::map<std::string, std::vector<std::pair<Cycle, double>>, std::less<>> series_;
  std::map<std::string, std::uint64_t, std::less<>> counters_;
};

}  // namespace amusim::sim
