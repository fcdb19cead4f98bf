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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "amusim/mem/memory_image.hpp"
#include "amusim/rt/emitter.hpp"
#include "amusim/rt/runtime.hpp"

namespace amusim::work {

using Knobs = std::map<std::string, std::int64_t>;

struct WorkloadParams {
  std::string name = "gups";
  std::uint64_t seed = 1;
  /// Scale overrides; keys must be known to the benchmark.
  Knobs knobs;
};

struct VerifyResult {
  bool pass = false;
  /// Words or results that differ from the reference.
  std::uint64_t mismatches = 0;
  std::string detail;
};

/// A benchmark kernel in two executable forms over one data layout: a
/// synchronous instruction trace for the baseline core and a coroutine task
/// set for the AMU runtime. Both forms mutate the same simulated memory, and
/// verify() checks it against a host-side sequential reference.
class Workload {
 public:
  Workload(std::string name, std::uint64_t seed, Knobs defaults, const Knobs& overrides);
  virtual ~Workload() = default;
  Workload(const Workload&) = delete;
  Workload& operator=(const Workload&) = delete;

  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t knob(const std::string& key) const;
  const Knobs& knobs() const { return knobs_; }

  /// Lays out and initializes the data set. Call once, before either form.
  void setup(mem::MemoryImage& image);
  virtual rt::TraceSource::Step baseline() = 0;
  virtual void spawn(rt::Runtime& rt) = 0;
  virtual rt::RuntimeConfig runtime_config() const;
  virtual VerifyResult verify() const = 0;

 protected:
  virtual void do_setup() = 0;
  mem::MemoryImage& image() const;
  std::uint32_t coroutines() const { return static_cast<std::uint32_t>(knob("coroutines")); }

 private:
  std::string name_;
  std::uint64_t seed_;
  Knobs knobs_;
  mem::MemoryImage* image_ = nullptr;
};

/// Throws ConfigError for an unknown name or knob.
std::unique_ptr<Workload> build(const WorkloadParams& params);
/// Every name build() accepts.
const std::vector<std::string>& benchmark_names();
/// Names of the six kernels in the core set (no guarded variants).
const std::vector<std::string>& core_benchmark_names();
/// Default scale knobs of a benchmark.
Knobs default_knobs(std::string_view name);

/// Splits `total` items into `parts` contiguous slices; slice i is
/// [first(i), first(i + 1)).
std::uint64_t slice_begin(std::uint64_t total, std::uint32_t parts, std::uint32_t i);

}  // namespace amusim::work
