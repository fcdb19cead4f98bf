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

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "workloads.hpp"

namespace amusim::work {

namespace {

/// Probe phase of a hash join. The build relation is already hashed into a
/// far-memory chained table of 48 B nodes {key, payload, next, pad} in 64 B
/// slots; the probe relation is a local-memory key array scanned in order.
/// Each probe walks its whole chain and writes the sum of matching payloads
/// (0 when nothing matches). Only the probe phase is timed.
class HashJoin final : public Workload {
 public:
  HashJoin(std::uint64_t seed, const Knobs& d, const Knobs& o)
      : Workload("hj", seed, d, o),
        buckets_(static_cast<std::uint64_t>(knob("buckets"))),
        tuples_(static_cast<std::uint64_t>(knob("build_tuples"))),
        probes_(static_cast<std::uint64_t>(knob("probes"))) {}

  rt::TraceSource::Step baseline() override {
    return [this, j = std::uint64_t{0}](rt::Emitter& em) mutable {
      if (j == probes_) return false;
      const Seq kl = em.load(probe_keys_ + j * 8, 8);
      const std::uint64_t k = image().load<std::uint64_t>(probe_keys_ + j * 8);
      const Addr head = bucket_addr(k);
      const Seq h = em.compute(3, {kl});
      Seq dep = em.load(head, 8, {h});
      Seq acc = kl;
      std::uint64_t sum = 0;
      for (Addr p = image().load<std::uint64_t>(head); p != 0; p = image().load<std::uint64_t>(p + 16)) {
        const Seq ld = em.load(p, kNodeBytes, {dep});
        acc = em.compute(1, {ld, acc});
        dep = ld;
        if (image().load<std::uint64_t>(p) == k) sum += image().load<std::uint64_t>(p + 8);
      }
      em.store(results_ + j * 8, 8, {acc});
      image().store<std::uint64_t>(results_ + j * 8, sum);
      ++j;
      return true;
    };
  }

  rt::RuntimeConfig runtime_config() const override {
    rt::RuntimeConfig cfg = Workload::runtime_config();
    cfg.slot_bytes = 64;
    return cfg;
  }

  void spawn(rt::Runtime& rt) override {
    spawn_slices(rt, probes_, coroutines(), [this](rt::Runtime& r, std::uint64_t f, std::uint64_t c) {
      return task(r, f, c);
    });
  }

  VerifyResult verify() const override {
    std::vector<std::uint64_t> expect(probes_, 0);
    std::vector<std::uint64_t> keys(tuples_);
    for (std::uint64_t i = 0; i < tuples_; ++i) keys[i] = build_key(i);
    std::vector<std::uint64_t> order(tuples_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) { return keys[a] < keys[b]; });
    for (std::uint64_t j = 0; j < probes_; ++j) {
      const std::uint64_t k = probe_key(j);
      auto it = std::lower_bound(order.begin(), order.end(), k,
                                 [&](std::uint64_t i, std::uint64_t key) { return keys[i] < key; });
      for (; it != order.end() && keys[*it] == k; ++it) expect[j] += payload(*it);
    }
    return check_results(image(), results_, expect, "probe sums");
  }

 private:
  static constexpr std::uint32_t kNodeBytes = 48;
  static constexpr std::uint32_t kSlotBytes = 64;

  std::uint64_t build_key(std::uint64_t i) const { return mix64(seed() ^ (i + 0x5151)) >> 8; }
  std::uint64_t payload(std::uint64_t i) const { return mix64(build_key(i) + i) >> 24; }
  /// Half the probes reuse a build key; the rest are random and almost
  /// always miss.
  std::uint64_t probe_key(std::uint64_t j) const {
    const std::uint64_t h = mix64(seed() * 11 + j);
    return (h & 1) != 0 ? build_key((h >> 1) % tuples_) : mix64(h) >> 8;
  }
  Addr bucket_addr(std::uint64_t key) const { return heads_ + (mix64(key) % buckets_) * 8; }

  void do_setup() override {
    heads_ = image().allocate(mem::RegionKind::far, buckets_ * 8, 4096);
    const Addr pool = image().allocate(mem::RegionKind::far, tuples_ * kSlotBytes, 4096);
    std::vector<std::uint64_t> perm(tuples_);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(mix64(seed() + 2));
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::uint64_t i = 0; i < tuples_; ++i) {
      const Addr p = pool + perm[i] * kSlotBytes;
      const std::uint64_t k = build_key(i);
      const Addr head = bucket_addr(k);
      image().store<std::uint64_t>(p, k);
      image().store<std::uint64_t>(p + 8, payload(i));
      image().store<std::uint64_t>(p + 16, image().load<std::uint64_t>(head));
      image().store<std::uint64_t>(head, p);
    }
    probe_keys_ = image().allocate(mem::RegionKind::local, probes_ * 8);
    results_ = image().allocate(mem::RegionKind::local, probes_ * 8);
    for (std::uint64_t j = 0; j < probes_; ++j) image().store<std::uint64_t>(probe_keys_ + j * 8, probe_key(j));
  }

  rt::Task task(rt::Runtime& rt, std::uint64_t first, std::uint64_t count) {
    const std::uint32_t slot = co_await rt.acquire_slot();
    for (std::uint64_t j = first; j < first + count; ++j) {
      const Seq kl = rt.em().load(probe_keys_ + j * 8, 8);
      const std::uint64_t k = image().load<std::uint64_t>(probe_keys_ + j * 8);
      const Addr head = bucket_addr(k);
      rt.em().compute(3, {kl});
      co_await rt.aload(slot, head, 8);
      Seq acc = rt.spm_load(slot, 8);
      std::uint64_t sum = 0;
      for (Addr p = rt.spm().load<std::uint64_t>(slot); p != 0;) {
        rt.em().compute(1, {acc});
        co_await rt.aload(slot, p, kNodeBytes);
        const Seq ld = rt.spm_load(slot, kNodeBytes);
        acc = rt.em().compute(1, {ld});
        if (rt.spm().load<std::uint64_t>(slot) == k) sum += rt.spm().load<std::uint64_t>(slot + 8);
        p = rt.spm().load<std::uint64_t>(slot + 16);
      }
      rt.em().store(results_ + j * 8, 8, {acc});
      image().store<std::uint64_t>(results_ + j * 8, sum);
    }
    rt.release_slot(slot);
  }

  std::uint64_t buckets_;
  std::uint64_t tuples_;
  std::uint64_t probes_;
  Addr heads_ = 0;
  Addr probe_keys_ = 0;
  Addr results_ = 0;
};

}  // namespace

Knobs hj_defaults() {
  return {{"buckets", 16000}, {"build_tuples", 32000}, {"probes", 4096}, {"coroutines", 256}, {"queue_length", 512}};
}

std::unique_ptr<Workload> make_hj(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides) {
  return std::make_unique<HashJoin>(seed, defaults, overrides);
}

}  // namespace amusim::work
