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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "amusim/amu/types.hpp"

namespace amusim::amu {

/// 512-bit batching register: lane 0 is the pointer to the next unused lane,
/// lanes 1..31 hold 16-bit IDs. A batch of k IDs occupies lanes 32-k..31 and
/// sets the pointer to 32-k; pointer 32 means empty.
class ListVectorRegister {
 public:
  static constexpr std::uint16_t kLanes = 32;
  static constexpr std::uint16_t kMaxIds = kLanes - 1;

  ListVectorRegister() { lanes_.fill(0); lanes_[0] = kLanes; }

  bool empty() const { return lanes_[0] == kLanes; }
  std::uint32_t size() const { return kLanes - lanes_[0]; }
  std::uint16_t pointer() const { return lanes_[0]; }

  /// Throws InvariantViolation when empty.
  RequestId pop();
  /// Replaces the contents with `ids` (at most 31); ids[0] pops first.
  void load(std::span<const RequestId> ids);
  void clear() { *this = ListVectorRegister{}; }

  std::vector<RequestId> contents() const;
  const std::array<std::uint16_t, kLanes>& lanes() const { return lanes_; }

  friend bool operator==(const ListVectorRegister&, const ListVectorRegister&) = default;

 private:
  std::array<std::uint16_t, kLanes> lanes_;
};

}  // namespace amusim::amu
