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

#include "amusim/mem/cache.hpp"

#include <fmt/format.h>

namespace amusim::mem {

void CacheLevelConfig::validate(const char* level) const {
  if (line_bytes == 0 || associativity == 0 || capacity_bytes == 0) {
    throw ConfigError(fmt::format("{}: capacity, associativity and line size must be nonzero", level));
  }
  if (capacity_bytes % (static_cast<std::uint64_t>(line_bytes) * associativity) != 0) {
    throw ConfigError(fmt::format("{}: capacity {} is not a multiple of line_bytes*associativity ({})", level,
                                  capacity_bytes, static_cast<std::uint64_t>(line_bytes) * associativity));
  }
  if (mshr_entries == 0) throw ConfigError(fmt::format("{}: mshr_entries must be at least 1", level));
}

CacheTags::CacheTags(const CacheLevelConfig& cfg) : sets_(cfg.sets()), ways_(cfg.associativity) {
  cfg.validate();
  tags_.assign(sets_ * ways_, 0);
  stamp_.assign(sets_ * ways_, 0);
}

std::size_t CacheTags::find(std::uint64_t line) const {
  const std::size_t base = (line % sets_) * ways_;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    if (tags_[base + w] == line + 1) return base + w;
  }
  return tags_.size();
}

bool CacheTags::probe(std::uint64_t line) const { return find(line) != tags_.size(); }

bool CacheTags::access(std::uint64_t line) {
  const std::size_t i = find(line);
  if (i == tags_.size()) return false;
  stamp_[i] = ++clock_;
  return true;
}

std::optional<std::uint64_t> CacheTags::fill(std::uint64_t line) {
  std::size_t hit = find(line);
  if (hit != tags_.size()) {
    stamp_[hit] = ++clock_;
    return std::nullopt;
  }
  const std::size_t base = (line % sets_) * ways_;
  std::size_t victim = base;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    const std::size_t i = base + w;
    if (tags_[i] == 0) {
      victim = i;
      break;
    }
    if (stamp_[i] < stamp_[victim]) victim = i;
  }
  std::optional<std::uint64_t> evicted;
  if (tags_[victim] != 0) evicted = tags_[victim] - 1;
  tags_[victim] = line + 1;
  stamp_[victim] = ++clock_;
  return evicted;
}

MshrPool::MshrPool(std::uint32_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("MSHR pool needs at least one entry");
}

bool MshrPool::try_acquire() {
  if (in_use_ >= capacity_) return false;
  ++in_use_;
  if (in_use_ > peak_) peak_ = in_use_;
  return true;
}

void MshrPool::acquire(std::function<void()> granted) {
  if (try_acquire()) {
    granted();
    return;
  }
  ++stalls_;
  waiters_.push_back(std::move(granted));
}

void MshrPool::release() {
  if (in_use_ == 0) throw InvariantViolation("MSHR release with no entry in use");
  if (!waiters_.empty()) {
    auto next = std::move(waiters_.front());
    waiters_.pop_front();
    next();
    return;
  }
  --in_use_;
}

}  // namespace amusim::mem
