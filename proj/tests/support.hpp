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

#include <memory>

#include "amusim/amu/amu.hpp"
#include "amusim/cpu/core.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/mem/memory_image.hpp"
#include "amusim/rt/runtime.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::testing {

/// One simulated machine with the default local, far and 64 KB SPM windows.
struct Machine {
  explicit Machine(double far_latency_ns = 1000.0, amu::AmuConfig amu_cfg = {}, std::uint64_t seed = 1)
      : sim(seed, 3.0) {
    image.map_region(mem::RegionKind::local, mem::kLocalBase, mem::kDefaultLocalBytes);
    image.map_region(mem::RegionKind::far, mem::kFarBase, mem::kDefaultFarBytes);
    image.map_region(mem::RegionKind::spm, mem::kSpmBase, amu_cfg.spm_bytes);
    mem::HierarchyConfig hc;
    hc.far.base_latency_ns = far_latency_ns;
    hc.spm_bytes = amu_cfg.spm_bytes;
    hier = std::make_unique<mem::Hierarchy>(sim, image, hc);
    unit = std::make_unique<amu::Amu>(sim, *hier, amu_cfg);
  }

  sim::Simulator sim;
  mem::MemoryImage image;
  std::unique_ptr<mem::Hierarchy> hier;
  std::unique_ptr<amu::Amu> unit;
};

/// Machine plus a runtime and a core driving it.
struct RuntimeMachine : Machine {
  explicit RuntimeMachine(rt::RuntimeConfig rc = {}, double far_latency_ns = 1000.0, amu::AmuConfig amu_cfg = {},
                          cpu::CoreParams cp = {})
      : Machine(far_latency_ns, amu_cfg), runtime(sim, *unit, image, rc), core_params(std::move(cp)) {}

  /// Runs to completion and returns the finish cycle.
  Cycle run() {
    core = std::make_unique<cpu::Core>(sim, hier.get(), runtime, &runtime, core_params);
    core->start();
    sim.run_until_idle();
    return core->finish_cycle();
  }

  rt::Runtime runtime;
  cpu::CoreParams core_params;
  std::unique_ptr<cpu::Core> core;
};

}  // namespace amusim::testing
