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

#include "amusim/work/gups.hpp"

#include <vector>

#include <fmt/format.h>

#include "workloads.hpp"

namespace amusim::work {

std::uint64_t gups_starts(std::int64_t n) {
  while (n < 0) n += kGupsPeriod;
  while (n > kGupsPeriod) n -= kGupsPeriod;
  if (n == 0) return 0x1;
  std::uint64_t m2[64];
  std::uint64_t temp = 0x1;
  for (auto& m : m2) {
    m = temp;
    temp = gups_next(gups_next(temp));
  }
  int i = 62;
  for (; i >= 0; --i) {
    if ((n >> i) & 1) break;
  }
  std::uint64_t ran = 0x2;
  while (i > 0) {
    temp = 0;
    for (int j = 0; j < 64; ++j) {
      if ((ran >> j) & 1) temp ^= m2[j];
    }
    ran = temp;
    --i;
    if ((n >> i) & 1) ran = gups_next(ran);
  }
  return ran;
}

Knobs gups_defaults() {
  return {{"table_words", 1 << 20}, {"updates", 100000}, {"coroutines", 1024}, {"queue_length", 2048}};
}

Knobs gups_guarded_defaults() {
  Knobs k = gups_defaults();
  k["coroutines"] = 256;
  k["queue_length"] = 512;
  return k;
}

namespace {

/// Random XOR updates to a far-memory table. Unguarded runs tolerate lost
/// updates from racing read-modify-writes up to 1% of the table, as the
/// classic benchmark does; the guarded form serializes each word and must
/// match exactly.
class Gups final : public Workload {
 public:
  Gups(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides, bool guarded)
      : Workload(guarded ? "gups_guarded" : "gups", seed, defaults, overrides),
        guarded_(guarded),
        words_(static_cast<std::uint64_t>(knob("table_words"))),
        updates_(static_cast<std::uint64_t>(knob("updates"))),
        start_(static_cast<std::int64_t>(mix64(seed) % static_cast<std::uint64_t>(kGupsPeriod / 2))) {
    if ((words_ & (words_ - 1)) != 0) throw ConfigError("workload.table_words must be a power of two");
  }

  rt::TraceSource::Step baseline() override {
    return [this, ran = gups_starts(start_), i = std::uint64_t{0}, prev = cpu::kNoDep](rt::Emitter& em) mutable {
      if (i == updates_) return false;
      ran = gups_next(ran);
      const Addr a = table_ + (ran & (words_ - 1)) * 8;
      const Seq r = em.compute(1, {prev});
      const Seq idx = em.compute(1, {r});
      const Seq ld = em.load(a, 8, {idx});
      const Seq x = em.compute(1, {ld, r});
      em.store(a, 8, {x, idx});
      image().store<std::uint64_t>(a, image().load<std::uint64_t>(a) ^ ran);
      prev = r;
      ++i;
      return true;
    };
  }

  rt::RuntimeConfig runtime_config() const override {
    rt::RuntimeConfig cfg = Workload::runtime_config();
    cfg.slot_bytes = 8;
    return cfg;
  }

  void spawn(rt::Runtime& rt) override {
    const std::uint32_t n = coroutines();
    for (std::uint32_t t = 0; t < n; ++t) {
      const std::uint64_t first = slice_begin(updates_, n, t);
      const std::uint64_t count = slice_begin(updates_, n, t + 1) - first;
      if (count > 0) rt.spawn(task(rt, first, count));
    }
  }

  VerifyResult verify() const override {
    std::vector<std::uint64_t> ref(words_);
    for (std::uint64_t i = 0; i < words_; ++i) ref[i] = i;
    std::uint64_t ran = gups_starts(start_);
    for (std::uint64_t i = 0; i < updates_; ++i) {
      ran = gups_next(ran);
      ref[ran & (words_ - 1)] ^= ran;
    }
    VerifyResult out;
    Addr first_bad = 0;
    for (std::uint64_t i = 0; i < words_; ++i) {
      if (image().load<std::uint64_t>(table_ + i * 8) != ref[i]) {
        if (out.mismatches++ == 0) first_bad = table_ + i * 8;
      }
    }
    const std::uint64_t allowed = guarded_ ? 0 : words_ / 100;
    out.pass = out.mismatches <= allowed;
    out.detail = out.mismatches == 0
                     ? "table matches reference"
                     : fmt::format("{} of {} words differ (allowed {}), first at {:#x}", out.mismatches, words_, allowed,
                                   first_bad);
    return out;
  }

 private:
  void do_setup() override {
    table_ = image().allocate(mem::RegionKind::far, words_ * 8, 4096);
    for (std::uint64_t i = 0; i < words_; ++i) image().store<std::uint64_t>(table_ + i * 8, i);
  }

  rt::Task task(rt::Runtime& rt, std::uint64_t first, std::uint64_t count) {
    std::uint64_t ran = gups_starts(start_ + static_cast<std::int64_t>(first));
    for (std::uint64_t k = 0; k < count; ++k) {
      ran = gups_next(ran);
      const Addr a = table_ + (ran & (words_ - 1)) * 8;
      rt.em().compute(2);
      if (guarded_) co_await rt.start_access(a);
      const std::uint32_t slot = co_await rt.acquire_slot();
      co_await rt.aload(slot, a, 8);
      rt.spm().store<std::uint64_t>(slot, rt.spm().load<std::uint64_t>(slot) ^ ran);
      const Seq ld = rt.spm_load(slot, 8);
      const Seq x = rt.em().compute(1, {ld});
      rt.spm_store(slot, 8, {x});
      if (guarded_) {
        co_await rt.astore(slot, a, 8);
        rt.release_slot(slot);
        rt.end_access(a);
      } else {
        rt.astore_detached(slot, a, 8);
      }
    }
  }

  bool guarded_;
  std::uint64_t words_;
  std::uint64_t updates_;
  std::int64_t start_;
  Addr table_ = 0;
};

}  // namespace

std::unique_ptr<Workload> make_gups(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides, bool guarded) {
  return std::make_unique<Gups>(seed, defaults, overrides, guarded);
}

}  // namespace amusim::work
