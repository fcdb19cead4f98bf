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
#include <optional>
#include <vector>

#include "amusim/common.hpp"

namespace amusim::rt {

struct GuardConfig {
  std::uint32_t tables = 3;
  std::uint32_t buckets = 4096;
  std::uint32_t bucket_bytes = 16;

  void validate() const;
  std::uint64_t footprint_bytes() const { return std::uint64_t{tables} * buckets * bucket_bytes; }
};

/// Multi-table address guard with FIFO waiters. Each table has its own
/// multiplicative hash; an address lives in at most one bucket overall and is
/// inserted into the first table whose bucket is empty. There is no
/// displacement, so a full collision across every table is an overflow.
class AddressGuardTable {
 public:
  struct Lookup {
    /// Simulated bucket addresses touched, in probe order.
    std::vector<Addr> probes;
    bool held = false;
  };

  AddressGuardTable(const GuardConfig& cfg, Addr base);

  /// Probes tables in order and stops at the holding bucket.
  Lookup lookup(Addr addr) const;
  /// Inserts an absent address; returns the bucket address written. Throws
  /// RuntimeFault when every candidate bucket is taken.
  Addr insert(Addr addr);
  /// Removes a held address with no waiters; returns the bucket address.
  Addr erase(Addr addr);
  /// FIFO of task ids waiting on a held address.
  std::deque<std::uint32_t>& waiters(Addr addr);
  bool held(Addr addr) const { return find(addr).has_value(); }

  std::uint32_t bucket_index(std::uint32_t table, Addr addr) const;
  Addr bucket_addr(std::uint32_t table, std::uint32_t bucket) const;
  std::size_t size() const { return size_; }
  std::uint64_t overflows() const { return overflows_; }
  const GuardConfig& config() const { return cfg_; }

 private:
  struct Bucket {
    bool occupied = false;
    Addr addr = 0;
    std::deque<std::uint32_t> waiters;
  };
  std::optional<std::size_t> find(Addr addr) const;

  GuardConfig cfg_;
  Addr base_;
  std::uint32_t shift_;
  std::vector<Bucket> buckets_;
  std::size_t size_ = 0;
  std::uint64_t overflows_ = 0;
};

}  // namespace amusim::rt
