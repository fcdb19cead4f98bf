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

#include "amusim/rt/spm_allocator.hpp"

#include <fmt/format.h>

#include "amusim/common.hpp"

namespace amusim::rt {

SpmAllocator::SpmAllocator(std::uint32_t base, std::uint32_t limit, std::uint32_t slot_bytes)
    : base_(base), limit_(limit), slot_bytes_(slot_bytes) {
  if (slot_bytes_ == 0) throw ConfigError("SPM slot size must be nonzero");
  if (limit_ < base_ || limit_ - base_ < slot_bytes_) {
    throw ConfigError(fmt::format("SPM data area [{}, {}) cannot hold one {}-byte slot", base_, limit_, slot_bytes_));
  }
  const std::uint32_t n = (limit_ - base_) / slot_bytes_;
  in_use_.assign(n, false);
  free_.reserve(n);
  for (std::uint32_t i = n; i-- > 0;) free_.push_back(i);
}

bool SpmAllocator::try_alloc(std::uint32_t& offset) {
  if (free_.empty()) return false;
  const std::uint32_t i = free_.back();
  free_.pop_back();
  in_use_[i] = true;
  offset = base_ + i * slot_bytes_;
  return true;
}

void SpmAllocator::free(std::uint32_t offset) {
  if (offset < base_ || (offset - base_) % slot_bytes_ != 0 || (offset - base_) / slot_bytes_ >= capacity()) {
    throw RuntimeFault(fmt::format("SPM offset {} is not a slot of this allocator", offset));
  }
  const std::uint32_t i = (offset - base_) / slot_bytes_;
  if (!in_use_[i]) throw RuntimeFault(fmt::format("SPM slot at offset {} freed twice", offset));
  in_use_[i] = false;
  free_.push_back(i);
}

}  // namespace amusim::rt
