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
#include <string_view>

#include "amusim/common.hpp"

namespace amusim::amu {

/// 16-bit handle of one asynchronous request. 0 is the shared failure code of
/// alloc and getfin and is never allocated.
enum class RequestId : std::uint16_t {};

inline constexpr RequestId kNoRequest{0};

constexpr std::uint16_t raw(RequestId id) { return static_cast<std::uint16_t>(id); }
constexpr RequestId make_id(std::uint32_t v) { return static_cast<RequestId>(static_cast<std::uint16_t>(v)); }

enum class RequestKind : std::uint8_t { aload = 1, astore = 2 };
enum class EntryStatus : std::uint8_t { idle = 0, issued = 1, in_flight = 2, done = 3 };
enum class CfgReg : std::uint8_t { granularity, queue_base, queue_length };

std::string_view to_string(RequestKind kind);
std::string_view to_string(EntryStatus status);
std::string_view to_string(CfgReg reg);

/// Metadata area layout at queue_base, for queue length Q:
///   [0, 16Q)      AMART, 16 bytes per ID, entry i-1 for ID i
///   [16Q, 18Q)    free ring, Q little-endian u16 slots
///   [18Q, 20Q)    finished ring, Q little-endian u16 slots
inline constexpr std::uint32_t kAmartEntryBytes = 16;
inline constexpr std::uint32_t kRingSlotBytes = 2;
constexpr std::uint64_t metadata_bytes(std::uint32_t queue_length) {
  return static_cast<std::uint64_t>(queue_length) * (kAmartEntryBytes + 2 * kRingSlotBytes);
}

inline constexpr std::uint32_t kLineBytes = 64;

struct AmuConfig {
  std::uint32_t spm_bytes = 64 * 1024;
  /// IDs a list vector register may buffer; 1 models DMA mode.
  std::uint32_t list_capacity = 31;
  /// False forces ID micro-ops to execute non-speculatively at the ROB head.
  bool speculative_id_ops = true;
  /// One-way ALSU to ASMC message cost.
  std::uint32_t hop_cycles = 10;
  /// On-controller cache of the free and finished rings, per ring.
  std::uint32_t register_cache_depth = 32;
  std::uint32_t register_cache_miss_cycles = 10;
  /// Released IDs are written back to the ASMC free ring in batches of this size.
  std::uint32_t recycle_capacity = 31;
  std::uint32_t uncommitted_registers = 2;
  /// Runs the partition audit after every mutating operation (slow).
  bool audit_every_op = false;

  void validate() const;
};

struct AmuStats {
  std::uint64_t asmc_messages = 0;
  std::uint64_t batch_fetches = 0;
  std::uint64_t squashes = 0;
  std::uint64_t ids_allocated = 0;
  std::uint64_t subrequests_issued = 0;
  std::uint64_t alloc_failures = 0;
  std::uint64_t alloc_stalls = 0;
  std::uint64_t uir_reuses = 0;
  std::uint64_t getfin_local = 0;
  std::uint64_t getfin_empty = 0;
  std::uint64_t register_cache_misses = 0;
  std::uint64_t requests_accepted = 0;
  std::uint64_t requests_completed = 0;
  std::uint64_t recycle_flushes = 0;
  std::uint64_t audits = 0;
};

}  // namespace amusim::amu
