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

#include "amusim/sim/stats.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace amusim::sim {

void StatsAccumulator::record_inflight_delta(Cycle now, std::int64_t delta) {
  if (now < last_update_) {
    throw InvariantViolation(fmt::format(
        "in-flight update at cycle {} precedes previous update at {}", now, last_update_));
  }
  inflight_integral_ += static_cast<double>(outstanding_) * static_cast<double>(now - last_update_);
  last_update_ = now;
  if (outstanding_ + delta < 0) {
    throw InvariantViolation(fmt::format(
        "outstanding far-memory count would become {} at cycle {}", outstanding_ + delta, now));
  }
  outstanding_ += delta;
  net_delta_ += delta;
  peak_outstanding_ = std::max(peak_outstanding_, outstanding_);
}

void StatsAccumulator::finalize(Cycle now) {
  if (now > last_update_) {
    inflight_integral_ += static_cast<double>(outstanding_) * static_cast<double>(now - last_update_);
    last_update_ = now;
  }
  busy_cycles_ = now;
}

double StatsAccumulator::mlp() const {
  if (busy_cycles_ == 0) return 0.0;
  return inflight_integral_ / static_cast<double>(busy_cycles_);
}

double StatsAccumulator::ipc() const {
  if (busy_cycles_ == 0) return 0.0;
  return static_cast<double>(committed_instructions_) / static_cast<double>(busy_cycles_);
}

void StatsAccumulator::sample(std::string_view series, Cycle at, double value) {
  auto it = series_.find(series);
  if (it == series_.end()) it = series_.emplace(std::string(series), std::vector<std::pair<Cycle, double>>{}).first;
  it->second.emplace_back(at, value);
}

const std::vector<std::pair<Cycle, double>>& StatsAccumulator::series(std::string_view name) const {
  static const std::vector<std::pair<Cycle, double>> kEmpty;
  auto it = series_.find(name);
  return it == series_.end() ? kEmpty : it->second;
}

std::uint64_t& StatsAccumulator::counter(std::string_view name) {
  auto it = counters_.find(name);
  if (it == counters_.end()) it = counters_.emplace(std::string(name), 0).first;
  return it->second;
}

std::uint64_t StatsAccumulator::counter_value(std::string_view name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

}  // namespace amusim::sim
