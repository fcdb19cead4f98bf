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

namespace amusim::work {

/// HPCC RandomAccess generator: x -> (x << 1) ^ (x < 0 ? 7 : 0) over 64-bit
/// two's complement.
inline constexpr std::uint64_t kGupsPoly = 0x7;
inline constexpr std::int64_t kGupsPeriod = 1317624576693539401LL;

constexpr std::uint64_t gups_next(std::uint64_t ran) {
  return (ran << 1) ^ (static_cast<std::int64_t>(ran) < 0 ? kGupsPoly : 0);
}

/// The n-th element of the sequence that starts at gups_starts(0) = 1,
/// computed in O(log n) by squaring the generator matrix.
std::uint64_t gups_starts(std::int64_t n);

}  // namespace amusim::work
