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
#include <functional>
#include <string>
#include <vector>

#include "amusim/amu/types.hpp"
#include "amusim/cpu/core.hpp"
#include "amusim/exp/config.hpp"
#include "amusim/exp/results.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/rt/runtime.hpp"

namespace amusim::exp {

/// Everything measured at one sweep point. `row` is the CSV view.
struct PointResult {
  ResultRow row;
  std::string verify_detail;
  std::uint64_t verify_mismatches = 0;
  cpu::CoreStats core;
  mem::HierarchyStats memory;
  amu::AmuStats amu;
  rt::RuntimeStats runtime;
  std::uint64_t far_packets = 0;
  std::uint64_t far_bytes = 0;
  std::int64_t peak_outstanding = 0;
  std::uint32_t peak_l1_mshr = 0;
  std::uint64_t audits = 0;
  double wall_seconds = 0.0;
};

/// Builds the machine for `p`, runs the workload to completion, verifies the
/// final memory image and collects statistics. Faults propagate as
/// exceptions.
PointResult run_point(const PointConfig& p);

/// Points of a sweep in output order: benchmark, then mode, then latency.
std::vector<PointConfig> sweep_points(const ExperimentConfig& cfg);

using Progress = std::function<void(const PointResult&, std::size_t done, std::size_t total)>;

/// Runs every point on up to `cfg.jobs` threads and returns results in
/// sweep order with normalized_time filled in.
std::vector<PointResult> run_sweep(const ExperimentConfig& cfg, const Progress& progress = {});

/// Aggregates per mode as a JSON document.
std::string json_summary(const ExperimentConfig& cfg, const std::vector<PointResult>& results);

}  // namespace amusim::exp
