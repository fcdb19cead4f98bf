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

#include "amusim/rt/emitter.hpp"

#include <fmt/format.h>

namespace amusim::rt {

Emitted& InstBuffer::at(Seq seq) {
  if (!contains(seq)) {
    throw InvariantViolation(fmt::format("instruction {} outside buffer [{}, {})", seq, base_, end()));
  }
  return buf_[seq - base_];
}

Seq InstBuffer::push(const Emitted& e) {
  buf_.push_back(e);
  return end() - 1;
}

void InstBuffer::retire(Seq seq) {
  if (buf_.empty() || seq != base_) {
    throw InvariantViolation(fmt::format("commit of {} but oldest buffered instruction is {}", seq, base_));
  }
  buf_.pop_front();
  ++base_;
}

Seq Emitter::emit(cpu::InstRecord inst, const AmiOp& op) {
  inst.category = category_;
  if (context_dep_ != cpu::kNoDep && inst.dep_count() < cpu::kMaxDeps) inst.add_dep(context_dep_);
  return buf_.push(Emitted{inst, op});
}

Seq Emitter::compute(std::uint32_t latency, std::initializer_list<Seq> deps) {
  return emit(cpu::InstRecord::compute(latency, deps));
}

Seq Emitter::load(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps) {
  return emit(cpu::InstRecord::load(addr, size, deps));
}

Seq Emitter::store(Addr addr, std::uint32_t size, std::initializer_list<Seq> deps) {
  return emit(cpu::InstRecord::store(addr, size, deps));
}

cpu::FetchResult TraceSource::fetch(Seq seq) {
  while (seq >= buf_.end() && !done_) done_ = !step_(em_);
  if (seq >= buf_.end()) return cpu::FetchResult{cpu::FetchStatus::end, {}};
  return cpu::FetchResult{cpu::FetchStatus::ok, buf_.at(seq).inst};
}

void TraceSource::on_commit(Seq seq, const cpu::InstRecord& /*inst*/) { buf_.retire(seq); }

}  // namespace amusim::rt
