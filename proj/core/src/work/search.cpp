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

// ---------------------------------------------------------------------------
// Binary search over a sorted far-memory array of 16 B records {key, value}.
// Record i has key 2i+1, so even probe keys are absent.

class BinarySearch final : public Workload {
 public:
  BinarySearch(std::uint64_t seed, const Knobs& d, const Knobs& o)
      : Workload("bs", seed, d, o),
        n_(static_cast<std::uint64_t>(knob("elements"))),
        lookups_(static_cast<std::uint64_t>(knob("lookups"))) {}

  rt::TraceSource::Step baseline() override {
    return [this, j = std::uint64_t{0}](rt::Emitter& em) mutable {
      if (j == lookups_) return false;
      const Seq kl = em.load(keys_ + j * 8, 8);
      const std::uint64_t k = image().load<std::uint64_t>(keys_ + j * 8);
      std::uint64_t lo = 0;
      std::uint64_t hi = n_;
      std::uint64_t result = kAbsent;
      Seq dep = kl;
      while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        const Addr rec = array_ + mid * 16;
        const Seq m = em.compute(1, {dep});
        const Seq ld = em.load(rec, 16, {m});
        dep = em.compute(1, {ld, kl});
        const std::uint64_t key = image().load<std::uint64_t>(rec);
        if (key == k) {
          result = image().load<std::uint64_t>(rec + 8);
          break;
        }
        if (key < k) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      em.store(results_ + j * 8, 8, {dep});
      image().store<std::uint64_t>(results_ + j * 8, result);
      ++j;
      return true;
    };
  }

  rt::RuntimeConfig runtime_config() const override {
    rt::RuntimeConfig cfg = Workload::runtime_config();
    cfg.slot_bytes = 16;
    return cfg;
  }

  void spawn(rt::Runtime& rt) override {
    spawn_slices(rt, lookups_, coroutines(), [this](rt::Runtime& r, std::uint64_t f, std::uint64_t c) {
      return task(r, f, c);
    });
  }

  VerifyResult verify() const override {
    std::vector<std::uint64_t> expect(lookups_);
    for (std::uint64_t j = 0; j < lookups_; ++j) {
      const std::uint64_t k = key_of(j);
      expect[j] = (k & 1) != 0 && k / 2 < n_ ? value_of(k / 2) : kAbsent;
    }
    return check_results(image(), results_, expect, "lookups");
  }

 private:
  std::uint64_t key_of(std::uint64_t j) const { return mix64(seed() * 0x2545F4914F6CDD1DULL + j) % (2 * n_ + 1); }
  std::uint64_t value_of(std::uint64_t i) const { return mix64(seed() ^ (i << 1)); }

  void do_setup() override {
    array_ = image().allocate(mem::RegionKind::far, n_ * 16, 4096);
    for (std::uint64_t i = 0; i < n_; ++i) {
      image().store<std::uint64_t>(array_ + i * 16, 2 * i + 1);
      image().store<std::uint64_t>(array_ + i * 16 + 8, value_of(i));
    }
    keys_ = image().allocate(mem::RegionKind::local, lookups_ * 8);
    results_ = image().allocate(mem::RegionKind::local, lookups_ * 8);
    for (std::uint64_t j = 0; j < lookups_; ++j) image().store<std::uint64_t>(keys_ + j * 8, key_of(j));
  }

  rt::Task task(rt::Runtime& rt, std::uint64_t first, std::uint64_t count) {
    const std::uint32_t slot = co_await rt.acquire_slot();
    for (std::uint64_t j = first; j < first + count; ++j) {
      const Seq kl = rt.em().load(keys_ + j * 8, 8);
      const std::uint64_t k = image().load<std::uint64_t>(keys_ + j * 8);
      std::uint64_t lo = 0;
      std::uint64_t hi = n_;
      std::uint64_t result = kAbsent;
      Seq dep = kl;
      while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        rt.em().compute(1, {dep});
        co_await rt.aload(slot, array_ + mid * 16, 16);
        const Seq ld = rt.spm_load(slot, 16);
        dep = rt.em().compute(1, {ld});
        const std::uint64_t key = rt.spm().load<std::uint64_t>(slot);
        if (key == k) {
          result = rt.spm().load<std::uint64_t>(slot + 8);
          break;
        }
        if (key < k) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      rt.em().store(results_ + j * 8, 8, {dep});
      image().store<std::uint64_t>(results_ + j * 8, result);
    }
    rt.release_slot(slot);
  }

  std::uint64_t n_;
  std::uint64_t lookups_;
  Addr array_ = 0;
  Addr keys_ = 0;
  Addr results_ = 0;
};

// ---------------------------------------------------------------------------
// Linked-list lookups. Nodes are {key, value, next}, one per cache line, and
// placed in a random permutation of far-memory lines so a traversal has no
// spatial locality. Head pointers and lookup records live in local memory.

class LinkedList final : public Workload {
 public:
  LinkedList(std::uint64_t seed, const Knobs& d, const Knobs& o)
      : Workload("ll", seed, d, o),
        lists_(static_cast<std::uint64_t>(knob("lists"))),
        nodes_(static_cast<std::uint64_t>(knob("nodes_per_list"))),
        lookups_(static_cast<std::uint64_t>(knob("lookups"))) {}

  rt::TraceSource::Step baseline() override {
    return [this, j = std::uint64_t{0}](rt::Emitter& em) mutable {
      if (j == lookups_) return false;
      const Seq rl = em.load(lookups_base_ + j * 16, 16);
      const Seq hl = em.load(heads_ + list_of(j) * 8, 8, {rl});
      const std::uint64_t k = key_for(j);
      std::uint64_t result = kAbsent;
      Seq dep = hl;
      for (Addr p = head_of(list_of(j)); p != 0;) {
        const Seq ld = em.load(p, kNodeBytes, {dep});
        const Seq cmp = em.compute(1, {ld, rl});
        dep = ld;
        if (image().load<std::uint64_t>(p) == k) {
          result = image().load<std::uint64_t>(p + 8);
          dep = cmp;
          break;
        }
        p = image().load<std::uint64_t>(p + 16);
      }
      em.store(results_ + j * 8, 8, {dep});
      image().store<std::uint64_t>(results_ + j * 8, result);
      ++j;
      return true;
    };
  }

  rt::RuntimeConfig runtime_config() const override {
    rt::RuntimeConfig cfg = Workload::runtime_config();
    cfg.slot_bytes = 32;
    return cfg;
  }

  void spawn(rt::Runtime& rt) override {
    spawn_slices(rt, lookups_, coroutines(), [this](rt::Runtime& r, std::uint64_t f, std::uint64_t c) {
      return task(r, f, c);
    });
  }

  VerifyResult verify() const override {
    std::vector<std::uint64_t> expect(lookups_);
    for (std::uint64_t j = 0; j < lookups_; ++j) {
      const std::uint64_t k = key_for(j);
      expect[j] = kAbsent;
      for (std::uint64_t i = 0; i < nodes_; ++i) {
        if (node_key(list_of(j), i) == k) {
          expect[j] = node_value(k);
          break;
        }
      }
    }
    return check_results(image(), results_, expect, "lookups");
  }

 private:
  static constexpr std::uint32_t kNodeBytes = 24;

  std::uint64_t node_key(std::uint64_t l, std::uint64_t i) const { return mix64(seed() ^ (l << 32 | i)) | 1; }
  static std::uint64_t node_value(std::uint64_t key) { return mix64(key); }
  std::uint64_t list_of(std::uint64_t j) const { return mix64(seed() + 2 * j + 1) % lists_; }
  /// Three of four lookups target a present key; the rest use an even key.
  std::uint64_t key_for(std::uint64_t j) const {
    const std::uint64_t h = mix64(seed() * 3 + j);
    if ((h & 3) == 0) return h & ~1ULL;
    return node_key(list_of(j), (h >> 8) % nodes_);
  }
  Addr head_of(std::uint64_t l) const { return image().load<std::uint64_t>(heads_ + l * 8); }

  void do_setup() override {
    const std::uint64_t total = lists_ * nodes_;
    const Addr pool = image().allocate(mem::RegionKind::far, total * amu::kLineBytes, 4096);
    std::vector<std::uint64_t> perm(total);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(mix64(seed()));
    std::shuffle(perm.begin(), perm.end(), rng);
    heads_ = image().allocate(mem::RegionKind::local, lists_ * 8);
    for (std::uint64_t l = 0; l < lists_; ++l) {
      Addr next = 0;
      for (std::uint64_t i = nodes_; i-- > 0;) {
        const Addr p = pool + perm[l * nodes_ + i] * amu::kLineBytes;
        const std::uint64_t k = node_key(l, i);
        image().store<std::uint64_t>(p, k);
        image().store<std::uint64_t>(p + 8, node_value(k));
        image().store<std::uint64_t>(p + 16, next);
        next = p;
      }
      image().store<std::uint64_t>(heads_ + l * 8, next);
    }
    lookups_base_ = image().allocate(mem::RegionKind::local, lookups_ * 16);
    results_ = image().allocate(mem::RegionKind::local, lookups_ * 8);
    for (std::uint64_t j = 0; j < lookups_; ++j) {
      image().store<std::uint64_t>(lookups_base_ + j * 16, list_of(j));
      image().store<std::uint64_t>(lookups_base_ + j * 16 + 8, key_for(j));
    }
  }

  rt::Task task(rt::Runtime& rt, std::uint64_t first, std::uint64_t count) {
    const std::uint32_t slot = co_await rt.acquire_slot();
    for (std::uint64_t j = first; j < first + count; ++j) {
      const Seq rl = rt.em().load(lookups_base_ + j * 16, 16);
      const Seq hl = rt.em().load(heads_ + list_of(j) * 8, 8, {rl});
      const std::uint64_t k = key_for(j);
      std::uint64_t result = kAbsent;
      Seq dep = hl;
      for (Addr p = head_of(list_of(j)); p != 0;) {
        rt.em().compute(1, {dep});
        co_await rt.aload(slot, p, kNodeBytes);
        const Seq ld = rt.spm_load(slot, kNodeBytes);
        dep = rt.em().compute(1, {ld});
        if (rt.spm().load<std::uint64_t>(slot) == k) {
          result = rt.spm().load<std::uint64_t>(slot + 8);
          break;
        }
        p = rt.spm().load<std::uint64_t>(slot + 16);
      }
      rt.em().store(results_ + j * 8, 8, {dep});
      image().store<std::uint64_t>(results_ + j * 8, result);
    }
    rt.release_slot(slot);
  }

  std::uint64_t lists_;
  std::uint64_t nodes_;
  std::uint64_t lookups_;
  Addr heads_ = 0;
  Addr lookups_base_ = 0;
  Addr results_ = 0;
};

// ---------------------------------------------------------------------------
// Chained hash table in far memory: a bucket array of head pointers and 32 B
// nodes {key, value, next, pad} in shuffled order. Lookups read the head
// (8 B) and then whole nodes (32 B). The guarded form increments the value of
// every found node inside a per-bucket guarded section.

class HashTable final : public Workload {
 public:
  HashTable(std::uint64_t seed, const Knobs& d, const Knobs& o, bool guarded)
      : Workload(guarded ? "ht_guarded" : "ht", seed, d, o),
        guarded_(guarded),
        buckets_(static_cast<std::uint64_t>(knob("buckets"))),
        entries_(buckets_ * static_cast<std::uint64_t>(knob("load_factor"))),
        lookups_(static_cast<std::uint64_t>(knob("lookups"))) {
    if ((buckets_ & (buckets_ - 1)) != 0) throw ConfigError("workload.buckets must be a power of two");
  }

  rt::TraceSource::Step baseline() override {
    return [this, j = std::uint64_t{0}](rt::Emitter& em) mutable {
      if (j == lookups_) return false;
      const Seq kl = em.load(keys_ + j * 8, 8);
      const std::uint64_t k = image().load<std::uint64_t>(keys_ + j * 8);
      const Addr head = bucket_addr(k);
      const Seq h = em.compute(3, {kl});
      const Seq hl = em.load(head, 8, {h});
      std::uint64_t result = kAbsent;
      Seq dep = hl;
      for (Addr p = image().load<std::uint64_t>(head); p != 0;) {
        const Seq ld = em.load(p, kNodeBytes, {dep});
        const Seq cmp = em.compute(1, {ld, kl});
        dep = ld;
        if (image().load<std::uint64_t>(p) == k) {
          dep = cmp;
          const std::uint64_t v = image().load<std::uint64_t>(p + 8);
          result = v;
          if (guarded_) {
            const Seq inc = em.compute(1, {cmp});
            em.store(p + 8, 8, {inc});
            image().store<std::uint64_t>(p + 8, v + 1);
          }
          break;
        }
        p = image().load<std::uint64_t>(p + 16);
      }
      record(em, j, result, dep);
      ++j;
      return true;
    };
  }

  rt::RuntimeConfig runtime_config() const override {
    rt::RuntimeConfig cfg = Workload::runtime_config();
    cfg.slot_bytes = 32;
    return cfg;
  }

  void spawn(rt::Runtime& rt) override {
    spawn_slices(rt, lookups_, coroutines(), [this](rt::Runtime& r, std::uint64_t f, std::uint64_t c) {
      return task(r, f, c);
    });
  }

  VerifyResult verify() const override {
    std::vector<std::uint64_t> value(entries_);
    for (std::uint64_t i = 0; i < entries_; ++i) value[i] = initial_value(i);
    std::vector<std::uint64_t> expect(lookups_, kAbsent);
    for (std::uint64_t j = 0; j < lookups_; ++j) {
      const std::uint64_t k = key_of_lookup(j);
      if ((k & 1) == 0) continue;
      const std::uint64_t i = lookup_target(j);
      expect[j] = value[i];
      if (guarded_) ++value[i];
    }
    if (!guarded_) return check_results(image(), results_, expect, "lookups");
    // Guarded increments commute, so only final values are order independent.
    VerifyResult out;
    Addr first_bad = 0;
    for (std::uint64_t i = 0; i < entries_; ++i) {
      const Addr p = node_addr_[i];
      if (image().load<std::uint64_t>(p + 8) != value[i] && out.mismatches++ == 0) first_bad = p + 8;
    }
    out.pass = out.mismatches == 0;
    out.detail = out.pass ? fmt::format("all {} node values match reference", entries_)
                          : fmt::format("{} of {} node values differ, first at {:#x}", out.mismatches, entries_,
                                        first_bad);
    return out;
  }

 private:
  static constexpr std::uint32_t kNodeBytes = 32;

  std::uint64_t node_key(std::uint64_t i) const { return mix64(seed() ^ (i * 0x9E3779B97F4A7C15ULL)) | 1; }
  std::uint64_t initial_value(std::uint64_t i) const { return mix64(node_key(i)) >> 16; }
  std::uint64_t lookup_target(std::uint64_t j) const { return mix64(seed() + 7 * j + 3) % entries_; }
  /// Seven of eight lookups hit; the rest use an even, absent key.
  std::uint64_t key_of_lookup(std::uint64_t j) const {
    const std::uint64_t h = mix64(seed() * 5 + j);
    return (h & 7) == 0 ? h & ~1ULL : node_key(lookup_target(j));
  }
  Addr bucket_addr(std::uint64_t key) const { return heads_ + (mix64(key) & (buckets_ - 1)) * 8; }

  void record(rt::Emitter& em, std::uint64_t j, std::uint64_t result, Seq dep) {
    if (guarded_) return;
    em.store(results_ + j * 8, 8, {dep});
    image().store<std::uint64_t>(results_ + j * 8, result);
  }

  void do_setup() override {
    heads_ = image().allocate(mem::RegionKind::far, buckets_ * 8, 4096);
    const Addr pool = image().allocate(mem::RegionKind::far, entries_ * kNodeBytes, 4096);
    std::vector<std::uint64_t> perm(entries_);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(mix64(seed() + 1));
    std::shuffle(perm.begin(), perm.end(), rng);
    node_addr_.resize(entries_);
    for (std::uint64_t i = 0; i < entries_; ++i) {
      const Addr p = pool + perm[i] * kNodeBytes;
      const std::uint64_t k = node_key(i);
      const Addr head = bucket_addr(k);
      image().store<std::uint64_t>(p, k);
      image().store<std::uint64_t>(p + 8, initial_value(i));
      image().store<std::uint64_t>(p + 16, image().load<std::uint64_t>(head));
      image().store<std::uint64_t>(head, p);
      node_addr_[i] = p;
    }
    keys_ = image().allocate(mem::RegionKind::local, lookups_ * 8);
    results_ = image().allocate(mem::RegionKind::local, lookups_ * 8);
    for (std::uint64_t j = 0; j < lookups_; ++j) image().store<std::uint64_t>(keys_ + j * 8, key_of_lookup(j));
  }

  rt::Task task(rt::Runtime& rt, std::uint64_t first, std::uint64_t count) {
    const std::uint32_t slot = co_await rt.acquire_slot();
    for (std::uint64_t j = first; j < first + count; ++j) {
      const Seq kl = rt.em().load(keys_ + j * 8, 8);
      const std::uint64_t k = image().load<std::uint64_t>(keys_ + j * 8);
      const Addr head = bucket_addr(k);
      rt.em().compute(3, {kl});
      if (guarded_) co_await rt.start_access(head);
      co_await rt.aload(slot, head, 8);
      Seq dep = rt.spm_load(slot, 8);
      std::uint64_t result = kAbsent;
      for (Addr p = rt.spm().load<std::uint64_t>(slot); p != 0;) {
        rt.em().compute(1, {dep});
        co_await rt.aload(slot, p, kNodeBytes);
        const Seq ld = rt.spm_load(slot, kNodeBytes);
        dep = rt.em().compute(1, {ld});
        if (rt.spm().load<std::uint64_t>(slot) == k) {
          const std::uint64_t v = rt.spm().load<std::uint64_t>(slot + 8);
          result = v;
          if (guarded_) {
            const Seq inc = rt.em().compute(1, {dep});
            rt.spm().store<std::uint64_t>(slot + 8, v + 1);
            rt.spm_store(slot + 8, 8, {inc});
            co_await rt.astore(slot + 8, p + 8, 8);
          }
          break;
        }
        p = rt.spm().load<std::uint64_t>(slot + 16);
      }
      if (guarded_) rt.end_access(head);
      record(rt.em(), j, result, dep);
    }
    rt.release_slot(slot);
  }

  bool guarded_;
  std::uint64_t buckets_;
  std::uint64_t entries_;
  std::uint64_t lookups_;
  Addr heads_ = 0;
  Addr keys_ = 0;
  Addr results_ = 0;
  std::vector<Addr> node_addr_;
};

}  // namespace

Knobs bs_defaults() {
  return {{"elements", 1 << 20}, {"lookups", 2048}, {"coroutines", 256}, {"queue_length", 512}};
}

Knobs ll_defaults() {
  return {{"lists", 64}, {"nodes_per_list", 128}, {"lookups", 512}, {"coroutines", 256}, {"queue_length", 512}};
}

Knobs ht_defaults() {
  return {{"buckets", 1 << 14}, {"load_factor", 2}, {"lookups", 4096}, {"coroutines", 256}, {"queue_length", 512}};
}

std::unique_ptr<Workload> make_bs(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides) {
  return std::make_unique<BinarySearch>(seed, defaults, overrides);
}

std::unique_ptr<Workload> make_ll(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides) {
  return std::make_unique<LinkedList>(seed, defaults, overrides);
}

std::unique_ptr<Workload> make_ht(std::uint64_t seed, const Knobs& defaults, const Knobs& overrides, bool guarded) {
  return std::make_unique<HashTable>(seed, defaults, overrides, guarded);
}

}  // namespace amusim::work
