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

#include "amusim/mem/far_link.hpp"

#include <algorithm>
#include <cmath>

namespace amusim::mem {

namespace {
Cycle to_cycles(double ns, double f) { return static_cast<Cycle>(std::llround(ns * f)); }
}  // namespace

FarLink::FarLink(const FarLinkConfig& cfg, double frequency_ghz) : cfg_(cfg), frequency_ghz_(frequency_ghz) {
  if (cfg.base_latency_ns < 0.0 || cfg.per_packet_overhead_ns < 0.0) {
    throw ConfigError("far link latencies must be non-negative");
  }
  base_ = to_cycles(cfg.base_latency_ns, frequency_ghz);
  overhead_ = to_cycles(cfg.per_packet_overhead_ns, frequency_ghz);
}

Cycle FarLink::transfer_cycles(std::uint64_t bytes) const {
  if (cfg_.bandwidth_bytes_per_ns <= 0.0) return 0;
  return to_cycles(static_cast<double>(bytes) / cfg_.bandwidth_bytes_per_ns, frequency_ghz_);
}

Cycle FarLink::reserve(Cycle now, std::uint64_t bytes) {
  const Cycle xfer = transfer_cycles(bytes);
  const Cycle start = std::max(now, link_free_);
  link_free_ = start + xfer;
  ++packets_;
  bytes_ += bytes;
  return start + xfer + base_ + overhead_;
}

}  // namespace amusim::mem
