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

#include "amusim/amu/alsu.hpp"
#include "amusim/amu/asmc.hpp"
#include "amusim/amu/types.hpp"
#include "amusim/mem/hierarchy.hpp"
#include "amusim/sim/engine.hpp"

namespace amusim::amu {

/// The asynchronous memory access unit: ALSU plus ASMC behind the
/// instruction-level interface used by the core and the runtime.
///
/// Request lifecycle: alloc (ID micro-op) and issue (request micro-op) at
/// execute; commit delivers the request to the ASMC after one hop; the ASMC
/// splits it into line packets and, when all respond, pushes the ID onto the
/// finished ring; getfin hands the ID to software; release recycles it.
class Amu {
 public:
  Amu(sim::Simulator& sim, mem::Hierarchy& hier, const AmuConfig& cfg);
  Amu(const Amu&) = delete;
  Amu& operator=(const Amu&) = delete;

  /// queue_* writes require a quiescent unit and reinitialize all lists.
  void cfg_write(CfgReg reg, std::uint64_t value);
  std::uint64_t cfg_read(CfgReg reg) const;

  AllocResult alloc(Seq tag);
  /// Validates and buffers a request built with the current granularity.
  /// Throws SimFault for id 0, an SPM range touching metadata or leaving the
  /// SPM, a non-far memory range, or a transfer that would straddle lines.
  void issue(Seq tag, RequestKind kind, RequestId id, std::uint32_t spm_addr, Addr mem_addr);
  void commit(Seq tag);
  void squash(Seq from);
  GetfinResult getfin();
  void release(RequestId id);

  /// Checks that every ID in 1..Q is in exactly one place. Throws
  /// InvariantViolation naming the first offender.
  void audit() const;

  /// No ID is outside the free side.
  bool quiescent() const;
  std::uint32_t outstanding() const { return asmc_.active(); }
  std::uint64_t metadata_bytes() const { return amu::metadata_bytes(queue_length_); }

  void set_finish_listener(std::function<void(RequestId)> fn) { asmc_.set_finish_listener(std::move(fn)); }
  void set_unstall_listener(std::function<void()> fn) { alsu_.set_unstall_listener(std::move(fn)); }

  const AmuConfig& config() const { return cfg_; }
  const AmuStats& stats() const { return stats_; }
  const Asmc& asmc() const { return asmc_; }
  const Alsu& alsu() const { return alsu_; }
  mem::Hierarchy& hierarchy() { return hier_; }

 private:
  void maybe_audit() const {
    if (cfg_.audit_every_op) audit();
  }

  sim::Simulator& sim_;
  mem::Hierarchy& hier_;
  AmuConfig cfg_;
  mutable AmuStats stats_;
  Asmc asmc_;
  Alsu alsu_;
  std::uint32_t granularity_ = 8;
  std::uint32_t queue_base_ = 0;
  std::uint32_t queue_length_ = 0;
};

}  // namespace amusim::amu
