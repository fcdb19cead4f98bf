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
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "amusim/common.hpp"

namespace amusim::mem {

struct CacheLevelConfig {
  std::uint64_t capacity_bytes = 32 * 1024;
  std::uint32_t associativity = 16;
  std::uint32_t line_bytes = 64;
  std::uint32_t hit_delay_cycles = 4;
  std::uint32_t mshr_entries = 48;

  /// Throws ConfigError when capacity is not a multiple of line*ways or a
  /// count is zero.
  void validate(const char* level = "cache") const;
  std::uint64_t sets() const { return capacity_bytes / (static_cast<std::uint64_t>(line_bytes) * associativity); }
};

/// Set-associative LRU tag array. Lines are line numbers (addr / line_bytes);
/// the set index is line % sets.
class CacheTags {
 public:
  explicit CacheTags(const CacheLevelConfig& cfg);

  /// Presence test without touching LRU state.
  bool probe(std::uint64_t line) const;
  /// Presence test that promotes the line to MRU on a hit.
  bool access(std::uint64_t line);
  /// Installs the line as MRU. Returns the evicted line, if any.
  std::optional<std::uint64_t> fill(std::uint64_t line);

  std::uint64_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }

 private:
  std::size_t find(std::uint64_t line) const;

  std::uint64_t sets_;
  std::uint32_t ways_;
  // tag = line + 1 so that 0 marks an invalid way
  std::vector<std::uint64_t> tags_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t clock_ = 0;
};

/// Miss status holding registers of one level. Waiters are granted in FIFO
/// order; a release with waiters hands the entry over without freeing it.
class MshrPool {
 public:
  explicit MshrPool(std::uint32_t capacity);

  bool try_acquire();
  /// Runs `granted` synchronously when an entry is free, otherwise queues it.
  void acquire(std::function<void()> granted);
  void release();

  std::uint32_t in_use() const { return in_use_; }
  std::uint32_t capacity() const { return capacity_; }
  std::size_t waiting() const { return waiters_.size(); }
  std::uint32_t peak_in_use() const { return peak_; }
  std::uint64_t stalls() const { return stalls_; }

 private:
  std::uint32_t capacity_;
  std::uint32_t in_use_ = 0;
  std::uint32_t peak_ = 0;
  std::uint64_t stalls_ = 0;
  std::deque<std::function<void()>> waiters_;
};

}  // namespace amusim::mem
