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

#include "amusim/amu/list_vector.hpp"

#include <fmt/format.h>

namespace amusim::amu {

std::string_view to_string(RequestKind kind) { return kind == RequestKind::aload ? "aload" : "astore"; }

std::string_view to_string(EntryStatus status) {
  switch (status) {
    case EntryStatus::idle: return "idle";
    case EntryStatus::issued: return "issued";
    case EntryStatus::in_flight: return "in-flight";
    case EntryStatus::done: return "done";
  }
  return "?";
}

std::string_view to_string(CfgReg reg) {
  switch (reg) {
    case CfgReg::granularity: return "granularity";
    case CfgReg::queue_base: return "queue_base";
    case CfgReg::queue_length: return "queue_length";
  }
  return "?";
}

void AmuConfig::validate() const {
  if (list_capacity < 1 || list_capacity > ListVectorRegister::kMaxIds) {
    throw ConfigError(fmt::format("list_capacity must be in 1..{}", ListVectorRegister::kMaxIds));
  }
  if (recycle_capacity < 1) throw ConfigError("recycle_capacity must be at least 1");
  if (uncommitted_registers < 1) throw ConfigError("at least one uncommitted ID register is required");
  if (spm_bytes == 0) throw ConfigError("AMU modes need a nonzero SPM");
}

RequestId ListVectorRegister::pop() {
  if (empty()) throw InvariantViolation("pop from empty list vector register");
  return make_id(lanes_[lanes_[0]++]);
}

void ListVectorRegister::load(std::span<const RequestId> ids) {
  if (ids.size() > kMaxIds) throw InvariantViolation(fmt::format("batch of {} IDs exceeds 31 lanes", ids.size()));
  lanes_.fill(0);
  const auto first = static_cast<std::uint16_t>(kLanes - ids.size());
  lanes_[0] = first;
  for (std::size_t i = 0; i < ids.size(); ++i) lanes_[first + i] = raw(ids[i]);
}

std::vector<RequestId> ListVectorRegister::contents() const {
  std::vector<RequestId> out;
  for (std::uint16_t i = lanes_[0]; i < kLanes; ++i) out.push_back(make_id(lanes_[i]));
  return out;
}

}  // namespace amusim::amu
