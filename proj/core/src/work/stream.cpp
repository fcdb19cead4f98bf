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

#include <vector>

#include "workloads.hpp"

namespace amusim::work {

namespace {

constexpr double kScalar = 3.0;
constexpr std::uint32_t kVectorBytes = 64;
constexpr std::uint32_t kLanes = kVectorBytes / 8;

/// STREAM triad c[i] = a[i] + s * b[i] over far-memory arrays of doubles,
/// executed with 64 B vector operations. The AMU form moves `chunk_bytes` of
/// a and b into the SPM per step, computes into a fresh slot and writes c back
/// without waiting; the slot returns to the allocator when the store lands.
class Stream final : public Workload {
 public:
  Stream(std::uint64_t seed, const Knobs& d, const Knobs& o)
      : Workload("stream", seed, d, o),
        n_(static_cast<std::uint64_t>(knob("elements"))),
        chunk_(static_cast<std::uint32_t>(knob("chunk_bytes"))) {
    if (chunk_ % kVectorBytes != 0) throw ConfigError("workload.chunk_bytes must be a multiple of 64");
    if ((n_ * 8) % chunk_ != 0) throw ConfigError("workload.elements must fill whole chunks");
  }

  rt::TraceSource::Step baseline() override {
    return [this, v = std::uint64_t{0}](rt::Emitter& em) mutable {
      if (v * kLanes == n_) return false;
      const std::uint64_t off = v * kVectorBytes;
      const Seq la = em.load(a_ + off, kVectorBytes);
      const Seq lb = em.load(b_ + off, kVectorBytes);
      const Seq f = em.compute(4, {la, lb});
      em.store(c_ + off, kVectorBytes, {f});
      for (std::uint32_t l = 0; l < kLanes; ++l) {
        const std::uint64_t o = off + l * 8;
        image().store<double>(c_ + o, image().load<double>(a_ + o) + kScalar * image().load<double>(b_ + o));
      }
      ++v;
      return true;
    };
  }

  rt::RuntimeConfig runtime_config() const override {
    rt::RuntimeConfig cfg = Workload::runtime_config();
    cfg.slot_bytes = chunk_;
    return cfg;
  }

  void spawn(rt::Runtime& rt) override {
    spawn_slices(rt, n_ * 8 / chunk_, coroutines(), [this](rt::Runtime& r, std::uint64_t f, std::uint64_t c) {
      return task(r, f, c);
    });
  }

  VerifyResult verify() const override {
    VerifyResult out;
    Addr first_bad = 0;
    for (std::uint64_t i = 0; i < n_; ++i) {
      const double want = a_value(i) + kScalar * b_value(i);
      if (image().load<double>(c_ + i * 8) != want && out.mismatches++ == 0) first_bad = c_ + i * 8;
    }
    out.pass = out.mismatches == 0;
    out.detail = out.pass ? fmt::format("all {} elements of c match a + s*b", n_)
                          : fmt::format("{} of {} elements differ, first at {:#x}", out.mismatches, n_, first_bad);
    return out;
  }

 private:
  double a_value(std::uint64_t i) const { return static_cast<double>(mix64(seed() + i) >> 40) * 0.25; }
  double b_value(std::uint64_t i) const { return static_cast<double>(mix64(seed() ^ (i << 20)) >> 44) * 0.5; }

  void do_setup() override {
    a_ = image().allocate(mem::RegionKind::far, n_ * 8, 4096);
    b_ = image().allocate(mem::RegionKind::far, n_ * 8, 4096);
    c_ = image().allocate(mem::RegionKind::far, n_ * 8, 4096);
    for (std::uint64_t i = 0; i < n_; ++i) {
      image().store<double>(a_ + i * 8, a_value(i));
      image().store<double>(b_ + i * 8, b_value(i));
    }
  }

  rt::Task task(rt::Runtime& rt, std::uint64_t first, std::uint64_t count) {
    const std::uint32_t sa = co_await rt.acquire_slot();
    const std::uint32_t sb = co_await rt.acquire_slot();
    for (std::uint64_t k = first; k < first + count; ++k) {
      const Addr off = k * chunk_;
      std::vector<rt::Transfer> loads(2);
      loads[0] = rt::Transfer{amu::RequestKind::aload, sa, a_ + off, chunk_};
      loads[1] = rt::Transfer{amu::RequestKind::aload, sb, b_ + off, chunk_};
      co_await rt.transfer_all(std::move(loads));
      const std::uint32_t sc = co_await rt.acquire_slot();
      for (std::uint32_t v = 0; v < chunk_; v += kVectorBytes) {
        const Seq la = rt.spm_load(sa + v, kVectorBytes);
        const Seq lb = rt.spm_load(sb + v, kVectorBytes);
        const Seq f = rt.em().compute(4, {la, lb});
        rt.spm_store(sc + v, kVectorBytes, {f});
        for (std::uint32_t l = 0; l < kLanes; ++l) {
          const std::uint32_t o = v + l * 8;
          rt.spm().store<double>(sc + o, rt.spm().load<double>(sa + o) + kScalar * rt.spm().load<double>(sb + o));
        }
      }
      rt.astore_detached(sc, c_ + off, chunk_);
    }
    rt.release_slot(sb);
    rt.release_slot(sa);
  }

  std::uint64_t n_;
  std::uint32_t chunk_;
  Addr a_ = 0;
  Addr b_ = 0;
  Addr c_ = 0;
};

}  // namespace

Knobs stream_defaults() {
  return {{"elements", 1 << 18}, {"chunk_bytes", 512}, {"coroutines", 32}, {"queue_length", 128}};
}

std::unique_ptr<Workload> make_stream(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides) {
  return std::make_unique<Stream>(seed, defaults, overrides);
}

}  // namespace amusim::work
