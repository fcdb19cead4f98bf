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
#include <vector>

namespace amusim::rt {

/// Fixed-size slot allocator over the SPM data area [base, limit). Slots are
/// disjoint and never reach the metadata area, which starts at `limit`.
class SpmAllocator {
 public:
  SpmAllocator(std::uint32_t base, std::uint32_t limit, std::uint32_t slot_bytes);

  /// Returns false when no slot is free.
  bool try_alloc(std::uint32_t& offset);
  void free(std::uint32_t offset);

  std::uint32_t capacity() const { return static_cast<std::uint32_t>(in_use_.size()); }
  std::uint32_t available() const { return static_cast<std::uint32_t>(free_.size()); }
  std::uint32_t in_use() const { return capacity() - available(); }
  std::uint32_t slot_bytes() const { return slot_bytes_; }
  std::uint32_t base() const { return base_; }
  std::uint32_t limit() const { return limit_; }

 private:
  std::uint32_t base_;
  std::uint32_t limit_;
  std::uint32_t slot_bytes_;
  std::vector<std::uint32_t> free_;  // LIFO of slot indices
  std::vector<bool> in_use_;
};

}  // namespace amusim::rt
