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

#include "amusim/work/workload.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "workloads.hpp"

namespace amusim::work {

Workload::Workload(std::string name, std::uint64_t seed, Knobs defaults, const Knobs& overrides)
    : name_(std::move(name)), seed_(seed), knobs_(std::move(defaults)) {
  for (const auto& [k, v] : overrides) {
    auto it = knobs_.find(k);
    if (it == knobs_.end()) {
      std::vector<std::string> keys;
      for (const auto& kv : knobs_) keys.push_back(kv.first);
      throw ConfigError(fmt::format("workload.{}: unknown knob for {} (known: {})", k, name_, fmt::join(keys, ", ")));
    }
    if (v < 1) throw ConfigError(fmt::format("workload.{} must be positive, got {}", k, v));
    it->second = v;
  }
}

std::int64_t Workload::knob(const std::string& key) const {
  auto it = knobs_.find(key);
  if (it == knobs_.end()) throw InvariantViolation(fmt::format("{} has no knob {}", name_, key));
  return it->second;
}

void Workload::setup(mem::MemoryImage& image) {
  if (image_) throw InvariantViolation(fmt::format("{} set up twice", name_));
  image_ = &image;
  do_setup();
}

mem::MemoryImage& Workload::image() const {
  if (!image_) throw InvariantViolation(fmt::format("{} used before setup", name_));
  return *image_;
}

rt::RuntimeConfig Workload::runtime_config() const {
  rt::RuntimeConfig cfg;
  cfg.queue_length = static_cast<std::uint32_t>(knob("queue_length"));
  return cfg;
}

std::uint64_t slice_begin(std::uint64_t total, std::uint32_t parts, std::uint32_t i) {
  return total * i / parts;
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"gups", "gups_guarded", "bs", "ll", "ht", "ht_guarded", "hj", "stream"};
  return names;
}

const std::vector<std::string>& core_benchmark_names() {
  static const std::vector<std::string> names{"gups", "bs", "ll", "ht", "hj", "stream"};
  return names;
}

Knobs default_knobs(std::string_view name) {
  if (name == "gups") return gups_defaults();
  if (name == "gups_guarded") return gups_guarded_defaults();
  if (name == "bs") return bs_defaults();
  if (name == "ll") return ll_defaults();
  if (name == "ht" || name == "ht_guarded") return ht_defaults();
  if (name == "hj") return hj_defaults();
  if (name == "stream") return stream_defaults();
  throw ConfigError(fmt::format("unknown benchmark '{}' (known: {})", name, fmt::join(benchmark_names(), ", ")));
}

std::unique_ptr<Workload> build(const WorkloadParams& p) {
  const Knobs defaults = default_knobs(p.name);
  if (p.name == "gups") return make_gups(p.seed, defaults, p.knobs, false);
  if (p.name == "gups_guarded") return make_gups(p.seed, defaults, p.knobs, true);
  if (p.name == "bs") return make_bs(p.seed, defaults, p.knobs);
  if (p.name == "ll") return make_ll(p.seed, defaults, p.knobs);
  if (p.name == "ht") return make_ht(p.seed, defaults, p.knobs, false);
  if (p.name == "ht_guarded") return make_ht(p.seed, defaults, p.knobs, true);
  if (p.name == "hj") return make_hj(p.seed, defaults, p.knobs);
  return make_stream(p.seed, defaults, p.knobs);
}

}  // namespace amusim::work
