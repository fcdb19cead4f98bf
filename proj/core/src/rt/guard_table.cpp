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

#include "amusim/rt/guard_table.hpp"

#include <array>
#include <bit>

#include <fmt/format.h>

namespace amusim::rt {

namespace {
// Distinct odd multipliers, one per table.
constexpr std::array<std::uint64_t, 8> kMultipliers{
    0x9E3779B97F4A7C15ULL, 0xC2B2AE3D27D4EB4FULL, 0x165667B19E3779F9ULL, 0xD6E8FEB86659FD93ULL,
    0xFF51AFD7ED558CCDULL, 0xC4CEB9FE1A85EC53ULL, 0x94D049BB133111EBULL, 0xBF58476D1CE4E5B9ULL,
};
}  // namespace

void GuardConfig::validate() const {
  if (tables < 1 || tables > kMultipliers.size()) {
    throw ConfigError(fmt::format("guard tables must be in 1..{}", kMultipliers.size()));
  }
  if (buckets < 2 || !std::has_single_bit(buckets)) throw ConfigError("guard buckets must be a power of two >= 2");
  if (bucket_bytes < 8) throw ConfigError("guard bucket_bytes must be at least 8");
}

AddressGuardTable::AddressGuardTable(const GuardConfig& cfg, Addr base)
    : cfg_((cfg.validate(), cfg)),
      base_(base),
      shift_(64 - static_cast<std::uint32_t>(std::countr_zero(cfg.buckets))),
      buckets_(std::size_t{cfg.tables} * cfg.buckets) {}

std::uint32_t AddressGuardTable::bucket_index(std::uint32_t table, Addr addr) const {
  return static_cast<std::uint32_t>(((addr >> 3) * kMultipliers[table]) >> shift_);
}

Addr AddressGuardTable::bucket_addr(std::uint32_t table, std::uint32_t bucket) const {
  return base_ + (std::uint64_t{table} * cfg_.buckets + bucket) * cfg_.bucket_bytes;
}

std::optional<std::size_t> AddressGuardTable::find(Addr addr) const {
  for (std::uint32_t t = 0; t < cfg_.tables; ++t) {
    const std::size_t i = std::size_t{t} * cfg_.buckets + bucket_index(t, addr);
    if (buckets_[i].occupied && buckets_[i].addr == addr) return i;
  }
  return std::nullopt;
}

AddressGuardTable::Lookup AddressGuardTable::lookup(Addr addr) const {
  Lookup out;
  for (std::uint32_t t = 0; t < cfg_.tables; ++t) {
    const std::uint32_t b = bucket_index(t, addr);
    out.probes.push_back(bucket_addr(t, b));
    const Bucket& k = buckets_[std::size_t{t} * cfg_.buckets + b];
    if (k.occupied && k.addr == addr) {
      out.held = true;
      break;
    }
  }
  return out;
}

Addr AddressGuardTable::insert(Addr addr) {
  if (find(addr)) throw InvariantViolation(fmt::format("guard for {:#x} inserted twice", addr));
  for (std::uint32_t t = 0; t < cfg_.tables; ++t) {
    const std::uint32_t b = bucket_index(t, addr);
    Bucket& k = buckets_[std::size_t{t} * cfg_.buckets + b];
    if (!k.occupied) {
      k.occupied = true;
      k.addr = addr;
      k.waiters.clear();
      ++size_;
      return bucket_addr(t, b);
    }
  }
  ++overflows_;
  throw RuntimeFault(fmt::format("address guard overflow: all {} candidate buckets for {:#x} are taken ({} guards live)",
                                 cfg_.tables, addr, size_));
}

Addr AddressGuardTable::erase(Addr addr) {
  const auto i = find(addr);
  if (!i) throw RuntimeFault(fmt::format("end_access on {:#x} without a matching start_access", addr));
  Bucket& k = buckets_[*i];
  if (!k.waiters.empty()) throw InvariantViolation(fmt::format("erasing guard {:#x} with waiters", addr));
  k.occupied = false;
  --size_;
  const auto t = static_cast<std::uint32_t>(*i / cfg_.buckets);
  return bucket_addr(t, static_cast<std::uint32_t>(*i % cfg_.buckets));
}

std::deque<std::uint32_t>& AddressGuardTable::waiters(Addr addr) {
  const auto i = find(addr);
  if (!i) throw RuntimeFault(fmt::format("no guard held for {:#x}", addr));
  return buckets_[*i].waiters;
}

}  // namespace amusim::rt
