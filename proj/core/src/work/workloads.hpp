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
#include <memory>
#include <vector>

#include <fmt/format.h>

#include "amusim/work/workload.hpp"

namespace amusim::work {

Knobs gups_defaults();
/// Fewer coroutines than gups: each holds a guard while its load is in
/// flight, and live guards must stay well below the guard-table capacity.
Knobs gups_guarded_defaults();
Knobs bs_defaults();
Knobs ll_defaults();
Knobs ht_defaults();
Knobs hj_defaults();
Knobs stream_defaults();

std::unique_ptr<Workload> make_gups(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides, bool guarded);
std::unique_ptr<Workload> make_bs(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides);
std::unique_ptr<Workload> make_ll(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides);
std::unique_ptr<Workload> make_ht(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides, bool guarded);
std::unique_ptr<Workload> make_hj(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides);
std::unique_ptr<Workload> make_stream(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides);

/// splitmix64 finalizer; used for keys, values and hashing.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Result word written for a lookup that finds nothing.
constexpr std::uint64_t kAbsent = ~0ULL;

/// Compares a local-memory result array against host expectations.
inline VerifyResult check_results(const mem::MemoryImage& image, Addr base, const std::vector<std::uint64_t>& expect,
                                  const char* what) {
  VerifyResult out;
  Addr first_bad = 0;
  for (std::size_t j = 0; j < expect.size(); ++j) {
    const Addr a = base + j * 8;
    if (image.load<std::uint64_t>(a) != expect[j] && out.mismatches++ == 0) first_bad = a;
  }
  out.pass = out.mismatches == 0;
  out.detail = out.pass ? fmt::format("all {} {} match reference", expect.size(), what)
                        : fmt::format("{} of {} {} differ, first at {:#x}", out.mismatches, expect.size(), what,
                                      first_bad);
  return out;
}

/// Runs `fn(rt, first, count)` over contiguous slices of `total` items, one
/// task per coroutine.
template <typename Fn>
void spawn_slices(rt::Runtime& rt, std::uint64_t total, std::uint32_t parts, Fn fn) {
  for (std::uint32_t t = 0; t < parts; ++t) {
    const std::uint64_t first = slice_begin(total, parts, t);
    const std::uint64_t count = slice_begin(total, parts, t + 1) - first;
    if (count > 0) rt.spawn(fn(rt, first, count));
  }
}

}  // namespace amusim::work
