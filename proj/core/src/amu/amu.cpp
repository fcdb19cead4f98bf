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

#include "amusim/amu/amu.hpp"

#include <vector>

#include <fmt/format.h>

namespace amusim::amu {

Amu::Amu(sim::Simulator& sim, mem::Hierarchy& hier, const AmuConfig& cfg)
    : sim_(sim), hier_(hier), cfg_((cfg.validate(), cfg)), asmc_(sim, hier, cfg_, stats_), alsu_(sim, asmc_, cfg_, stats_) {
  if (hier.spm().size() < cfg_.spm_bytes) {
    throw ConfigError(fmt::format("hierarchy SPM of {} bytes is smaller than the AMU's {}", hier.spm().size(),
                                  cfg_.spm_bytes));
  }
}

bool Amu::quiescent() const {
  return asmc_.active() == 0 && asmc_.finished_count() == 0 && !alsu_.has_uncommitted() &&
         alsu_.in_transit_count() == 0 && alsu_.delivered_count() == 0 && alsu_.finished_register().empty();
}

void Amu::cfg_write(CfgReg reg, std::uint64_t value) {
  switch (reg) {
    case CfgReg::granularity: {
      const std::uint64_t data_area = cfg_.spm_bytes - metadata_bytes();
      if (value < 1 || value > data_area) {
        throw ConfigError(fmt::format("granularity {} outside 1..{} (SPM data area)", value, data_area));
      }
      granularity_ = static_cast<std::uint32_t>(value);
      return;
    }
    case CfgReg::queue_base:
    case CfgReg::queue_length: {
      if (!quiescent()) throw ConfigError(fmt::format("{} written while requests are outstanding", to_string(reg)));
      const std::uint64_t base = reg == CfgReg::queue_base ? value : queue_base_;
      const std::uint64_t length = reg == CfgReg::queue_length ? value : queue_length_;
      if (reg == CfgReg::queue_length && (length < 1 || length > 65535)) {
        throw ConfigError(fmt::format("queue_length {} outside 1..65535", length));
      }
      if (base + amu::metadata_bytes(static_cast<std::uint32_t>(length)) > cfg_.spm_bytes) {
        throw ConfigError(fmt::format("metadata for {} IDs at SPM offset {} exceeds the {}-byte SPM", length, base,
                                      cfg_.spm_bytes));
      }
      queue_base_ = static_cast<std::uint32_t>(base);
      queue_length_ = static_cast<std::uint32_t>(length);
      if (queue_length_ > 0) {
        asmc_.configure(queue_base_, queue_length_);
        alsu_.reset();
      }
      maybe_audit();
      return;
    }
  }
}

std::uint64_t Amu::cfg_read(CfgReg reg) const {
  switch (reg) {
    case CfgReg::granularity: return granularity_;
    case CfgReg::queue_base: return queue_base_;
    case CfgReg::queue_length: return queue_length_;
  }
  return 0;
}

AllocResult Amu::alloc(Seq tag) {
  if (queue_length_ == 0) {
    ++stats_.alloc_failures;
    return AllocResult{AllocStatus::failed, kNoRequest, 1};
  }
  const AllocResult r = alsu_.alloc(tag);
  maybe_audit();
  return r;
}

void Amu::issue(Seq tag, RequestKind kind, RequestId id, std::uint32_t spm_addr, Addr mem_addr) {
  if (id == kNoRequest) throw SimFault(fmt::format("{} issued with the failure ID 0", to_string(kind)));
  const std::uint32_t g = granularity_;
  const std::uint64_t meta_lo = queue_base_;
  const std::uint64_t meta_hi = queue_base_ + metadata_bytes();
  const std::uint64_t lo = spm_addr;
  const std::uint64_t hi = lo + g;
  if (hi > cfg_.spm_bytes) {
    throw SimFault(fmt::format("{} SPM range [{:#x}, {:#x}) exceeds the {}-byte SPM", to_string(kind), lo, hi,
                               cfg_.spm_bytes));
  }
  if (lo < meta_hi && meta_lo < hi) {
    throw SimFault(fmt::format("{} SPM range [{:#x}, {:#x}) overlaps the metadata area [{:#x}, {:#x})",
                               to_string(kind), lo, hi, meta_lo, meta_hi));
  }
  const mem::Region& r = hier_.image().region_of(mem_addr, g);
  if (r.kind != mem::RegionKind::far) {
    throw SimFault(fmt::format("{} target {:#x} is not in far memory", to_string(kind), mem_addr));
  }
  const bool straddles = g <= kLineBytes ? (mem_addr % kLineBytes) + g > kLineBytes : mem_addr % kLineBytes != 0;
  if (straddles) {
    throw SimFault(fmt::format("{} of {} bytes at {:#x} cannot be split into line-sized sub-requests",
                               to_string(kind), g, mem_addr));
  }
  alsu_.issue(tag, Request{id, kind, spm_addr, mem_addr, g});
}

void Amu::commit(Seq tag) {
  alsu_.commit(tag);
  maybe_audit();
}

void Amu::squash(Seq from) {
  alsu_.squash(from);
  maybe_audit();
}

GetfinResult Amu::getfin() {
  if (queue_length_ == 0) return GetfinResult{kNoRequest, 1};
  const GetfinResult r = alsu_.getfin();
  maybe_audit();
  return r;
}

void Amu::release(RequestId id) {
  alsu_.release(id);
  maybe_audit();
}

void Amu::audit() const {
  ++stats_.audits;
  std::vector<std::uint32_t> counts(queue_length_ + 1, 0);
  std::vector<const char*> where(queue_length_ + 1, "nowhere");
  auto add = [&](RequestId id, const char* place) {
    const auto i = raw(id);
    if (i == 0 || i > queue_length_) throw InvariantViolation(fmt::format("ID {} out of range in {}", i, place));
    ++counts[i];
    where[i] = place;
  };
  for (RequestId id : asmc_.free_ring()) add(id, "ASMC free list");
  for (RequestId id : asmc_.finished_ring()) add(id, "ASMC finished list");
  std::uint32_t active = 0;
  for (std::uint32_t i = 1; i <= queue_length_; ++i) {
    const AmartEntry e = asmc_.read_entry(make_id(i));
    if (e.status == EntryStatus::issued || e.status == EntryStatus::in_flight) {
      add(e.id, "AMART in flight");
      ++active;
      if (e.completed_subrequests >= e.total_subrequests) {
        throw InvariantViolation(fmt::format("AMART entry {} is {} with {}/{} sub-requests done", i,
                                             to_string(e.status), e.completed_subrequests, e.total_subrequests));
      }
    } else if (e.status == EntryStatus::done && e.completed_subrequests != e.total_subrequests) {
      throw InvariantViolation(fmt::format("AMART entry {} is done with {}/{} sub-requests", i,
                                           e.completed_subrequests, e.total_subrequests));
    }
  }
  if (active != asmc_.active()) {
    throw InvariantViolation(fmt::format("AMART holds {} active entries, controller counts {}", active, asmc_.active()));
  }
  alsu_.tally(counts, where);
  for (std::uint32_t i = 1; i <= queue_length_; ++i) {
    if (counts[i] != 1) {
      throw InvariantViolation(fmt::format("ID {} appears {} times (last seen: {}) at cycle {}", i, counts[i],
                                           where[i], sim_.now()));
    }
  }
}

}  // namespace amusim::amu
