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

#include "amusim/common.hpp"

namespace amusim::mem {

struct FarLinkConfig {
  /// One-way request-to-response latency; the swept variable.
  double base_latency_ns = 1000.0;
  /// <= 0 means unlimited bandwidth.
  double bandwidth_bytes_per_ns = 16.0;
  double per_packet_overhead_ns = 30.0;
};

/// Serial far-memory pipe. A packet occupies the link for its transfer time;
/// the fixed latency and per-packet overhead overlap freely.
///   start    = max(now, link_free)
///   link_free = start + xfer
///   done     = start + xfer + base + overhead
class FarLink {
 public:
  FarLink(const FarLinkConfig& cfg, double frequency_ghz);

  /// Books a packet of `bytes` entering at `now`; returns its completion cycle.
  Cycle reserve(Cycle now, std::uint64_t bytes);

  Cycle transfer_cycles(std::uint64_t bytes) const;
  Cycle base_cycles() const { return base_; }
  Cycle overhead_cycles() const { return overhead_; }
  const FarLinkConfig& config() const { return cfg_; }

  std::uint64_t packets() const { return packets_; }
  std::uint64_t bytes() const { return bytes_; }

 private:
  FarLinkConfig cfg_;
  double frequency_ghz_;
  Cycle base_;
  Cycle overhead_;
  Cycle link_free_ = 0;
  std::uint64_t packets_ = 0;
  std::uint64_t bytes_ = 0;
};

}  // namespace amusim::mem
