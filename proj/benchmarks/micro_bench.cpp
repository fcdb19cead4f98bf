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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "amusim/exp/config.hpp"
#include "amusim/exp/experiment.hpp"
#include "amusim/mem/cache.hpp"
#include "amusim/mem/far_link.hpp"
#include "amusim/sim/engine.hpp"

namespace {

using namespace amusim;

void BM_EventQueue(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    sim::Simulator s(1);
    std::uint64_t fired = 0;
    for (int i = 0; i < n; ++i) s.schedule(s.rng()() % 10000, [&] { ++fired; });
    s.run_until_idle();
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1 << 12)->Arg(1 << 16);

void BM_CacheTags(benchmark::State& state) {
  mem::CacheTags tags(mem::CacheLevelConfig{});
  std::mt19937_64 rng(3);
  std::vector<std::uint64_t> lines(1 << 16);
  for (auto& l : lines) l = rng() % 4096;
  std::size_t i = 0;
  for (auto _ : state) {
    const std::uint64_t line = lines[i++ & (lines.size() - 1)];
    if (!tags.access(line)) tags.fill(line);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CacheTags);

void BM_FarLinkReserve(benchmark::State& state) {
  mem::FarLink link(mem::FarLinkConfig{}, 3.0);
  Cycle now = 0;
  for (auto _ : state) benchmark::DoNotOptimize(link.reserve(now++, 64));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FarLinkReserve);

/// Whole-simulator throughput on a reduced GUPS point.
void BM_GupsPoint(benchmark::State& state) {
  const auto mode = state.range(0) == 0 ? exp::Mode::baseline : exp::Mode::amu;
  exp::ExperimentConfig cfg;
  cfg.workload["gups"] = {{"table_words", 1 << 16}, {"updates", 5000}, {"coroutines", 256}, {"queue_length", 512}};
  const exp::PointConfig p = exp::resolve_point(cfg, mode, "gups", 1000);
  for (auto _ : state) {
    const auto r = exp::run_point(p);
    benchmark::DoNotOptimize(r.row.exec_cycles);
  }
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_GupsPoint)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
