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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amusim/amu/types.hpp"
#include "amusim/cpu/core.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/rt/guard_table.hpp"
#include "amusim/work/workload.hpp"

namespace amusim::exp {

enum class Mode : std::uint8_t { baseline, cxl_ideal, amu, amu_dma };

std::string_view to_string(Mode m);
/// Throws ConfigError for an unknown name.
Mode parse_mode(std::string_view s);
bool is_amu(Mode m);

struct SpeculationConfig {
  double squash_probability = 0.0;
  std::uint32_t squash_max_depth = 16;
  std::uint64_t squash_limit = 0;
  /// Run the ID partition audit after every injected squash.
  bool audit_on_squash = false;
};

struct ExperimentConfig {
  std::vector<Mode> modes{Mode::baseline};
  std::vector<std::string> benchmarks{"gups"};
  std::vector<double> latencies_ns{100, 200, 500, 1000, 2000, 5000};
  std::uint64_t seed = 1;
  double frequency_ghz = 3.0;
  Cycle cycle_cap = 10'000'000'000ULL;

  cpu::CoreParams core;
  /// far.base_latency_ns is replaced by each sweep latency.
  mem::HierarchyConfig memory;
  amu::AmuConfig amu;
  rt::GuardConfig guard;
  SpeculationConfig speculation;
  /// Per-benchmark scale overrides: workload.<benchmark>.<knob>.
  std::map<std::string, work::Knobs> workload;

  std::string csv_path;
  std::string json_path;
  std::uint32_t jobs = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses YAML text. Unknown keys are errors. `overrides` are "a.b.c=value"
/// strings applied to the document before it is read; the value is parsed
/// as YAML, so lists like "[100,200]" work.
ExperimentConfig parse_config(std::string_view yaml_text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Fully resolved parameters for one sweep point, after mode adjustments.
struct PointConfig {
  Mode mode = Mode::baseline;
  std::string benchmark;
  double latency_ns = 100;
  std::uint64_t seed = 1;
  double frequency_ghz = 3.0;
  Cycle cycle_cap = 10'000'000'000ULL;
  cpu::CoreParams core;
  mem::HierarchyConfig memory;
  amu::AmuConfig amu;
  rt::GuardConfig guard;
  SpeculationConfig speculation;
  work::Knobs knobs;
};

/// Applies the mode rules:
///  - cxl_ideal: 256 MSHRs at both levels and the stream prefetcher;
///  - amu, amu_dma: an SPM of amu.spm_bytes carved out of L2;
///  - amu_dma: one ID per list vector register and non-speculative AMI.
PointConfig resolve_point(const ExperimentConfig& cfg, Mode mode, const std::string& benchmark, double latency_ns);

}  // namespace amusim::exp
