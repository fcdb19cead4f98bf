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
#include <deque>
#include <functional>
#include <initializer_list>

#include "amusim/amu/types.hpp"
#include "amusim/common.hpp"
#include "amusim/cpu/core.hpp"

namespace amusim::rt {

/// Runtime-side description of an AMI instruction awaiting fetch.
struct AmiOp {
  enum class Kind : std::uint8_t { none, cfg, aload, astore };
  Kind kind = Kind::none;
  amu::CfgReg reg = amu::CfgReg::granularity;
  std::uint64_t value = 0;
  std::uint32_t spm_addr = 0;
  Addr mem_addr = 0;
  /// Owning task, or kNoTask for a detached store.
  std::uint32_t task = ~0U;
  bool detached = false;
  /// Set on the copy queued after a failed alloc.
  bool retried = false;
  // Filled by the first fetch.
  bool fetched = false;
  bool failed = false;
  amu::RequestId id = amu::kNoRequest;
};

inline constexpr std::uint32_t kNoTask = ~0U;

struct Emitted {
  cpu::InstRecord inst;
  AmiOp op;
};

/// Instructions emitted but not yet committed, addressed by sequence number.
/// Kept until commit so a squash can replay them unchanged.
class InstBuffer {
 public:
  Seq begin() const { return base_; }
  Seq end() const { return base_ + buf_.size(); }
  bool contains(Seq seq) const { return seq >= base_ && seq < end(); }
  Emitted& at(Seq seq);
  Seq push(const Emitted& e);
  /// Drops the oldest entry, which must be `seq`.
  void retire(Seq seq);

 private:
  Seq base_ = 0;
  std::deque<Emitted> buf_;
};

/// Appends instructions to a buffer. Every instruction gets the current
/// category and, if set, a dependency on the current context instruction.
class Emitter {
 public:
  explicit Emitter(InstBuffer& buf) : buf_(buf) {}

  Seq emit(cpu::InstRecord inst, const AmiOp& op = {});
  Seq compute(std::uint32_t latency, std::initializer_list<Seq> deps = {});
  Seq load(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps = {});
  Seq store(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps = {});

  Seq next_seq() const { return buf_.end(); }
  cpu::Category category() const { return category_; }
  void set_category(cpu::Category c) { category_ = c; }
  Seq context_dep() const { return context_dep_; }
  void set_context_dep(Seq s) { context_dep_ = s; }

 private:
  InstBuffer& buf_;
  cpu::Category category_ = cpu::Category::app;
  Seq context_dep_ = cpu::kNoDep;
};

class CategoryScope {
 public:
  CategoryScope(Emitter& em, cpu::Category c) : em_(em), saved_(em.category()) { em_.set_category(c); }
  ~CategoryScope() { em_.set_category(saved_); }
  CategoryScope(const CategoryScope&) = delete;
  CategoryScope& operator=(const CategoryScope&) = delete;

 private:
  Emitter& em_;
  cpu::Category saved_;
};

/// Instruction source driven by a generator step. Each call to `step` does
/// one iteration of functional work and emits its timing instructions;
/// returning false ends the stream.
class TraceSource final : public cpu::InstSource {
 public:
  using Step = std::function<bool(Emitter&)>;
  explicit TraceSource(Step step) : step_(std::move(step)), em_(buf_) {}

  cpu::FetchResult fetch(Seq seq) override;
  void on_commit(Seq seq, const cpu::InstRecord& inst) override;
  std::uint64_t emitted() const { return buf_.end(); }

 private:
  Step step_;
  InstBuffer buf_;
  Emitter em_;
  bool done_ = false;
};

}  // namespace amusim::rt
