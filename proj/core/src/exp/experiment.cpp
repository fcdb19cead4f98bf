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

#include "amusim/exp/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "amusim/amu/amu.hpp"
#include "amusim/mem/memory_image.hpp"
#include "amusim/rt/emitter.hpp"
#include "amusim/work/workload.hpp"
#include "json.hpp"

namespace amusim::exp {

namespace {

void fill_row(PointResult& out, const PointConfig& p, const cpu::Core& core, const sim::Simulator& sim) {
  ResultRow& r = out.row;
  r.mode = std::string(to_string(p.mode));
  r.benchmark = p.benchmark;
  r.latency_ns = p.latency_ns;
  r.seed = p.seed;
  r.exec_cycles = core.finish_cycle();
  r.mlp = sim.stats().mlp();
  r.ipc = r.exec_cycles ? static_cast<double>(core.stats().committed) / static_cast<double>(r.exec_cycles) : 0.0;
  r.guard_time_fraction =
      r.exec_cycles ? static_cast<double>(core.stats().cycles_by_category[static_cast<std::size_t>(cpu::Category::guard)]) /
                          static_cast<double>(r.exec_cycles)
                    : 0.0;
  out.core = core.stats();
  out.peak_outstanding = sim.stats().peak_outstanding();
}

}  // namespace

PointResult run_point(const PointConfig& p) {
  const auto t0 = std::chrono::steady_clock::now();
  PointResult out;
  sim::Simulator sim(p.seed, p.frequency_ghz);
  sim.set_cycle_cap(p.cycle_cap);
  mem::MemoryImage image;
  image.map_region(mem::RegionKind::local, mem::kLocalBase, mem::kDefaultLocalBytes);
  image.map_region(mem::RegionKind::far, mem::kFarBase, mem::kDefaultFarBytes);
  if (p.memory.spm_bytes > 0) image.map_region(mem::RegionKind::spm, mem::kSpmBase, p.memory.spm_bytes);
  mem::Hierarchy hier(sim, image, p.memory);

  auto wl = work::build(work::WorkloadParams{p.benchmark, p.seed, p.knobs});
  wl->setup(image);
  spdlog::debug("point {} {} {}ns: setup done", to_string(p.mode), p.benchmark, p.latency_ns);

  if (!is_amu(p.mode)) {
    rt::TraceSource source(wl->baseline());
    cpu::Core core(sim, &hier, source, nullptr, p.core);
    core.start();
    sim.run_until_idle();
    if (!core.finished()) throw SimFault(fmt::format("{} {}: core did not drain", to_string(p.mode), p.benchmark));
    fill_row(out, p, core, sim);
  } else {
    amu::Amu unit(sim, hier, p.amu);
    rt::RuntimeConfig rc = wl->runtime_config();
    rc.switch_cycles = p.core.coroutine_switch_cycles;
    rc.guard = p.guard;
    rt::Runtime runtime(sim, unit, image, rc);
    wl->spawn(runtime);
    cpu::CoreParams cp = p.core;
    if (p.speculation.audit_on_squash) {
      cp.after_squash = [&unit, &out] {
        unit.audit();
        ++out.audits;
      };
    }
    cpu::Core core(sim, &hier, runtime, &runtime, cp);
    core.start();
    sim.run_until_idle();
    if (!core.finished() || !runtime.finished()) {
      throw SimFault(fmt::format("{} {}: run ended with work left\n{}", to_string(p.mode), p.benchmark, runtime.dump()));
    }
    unit.audit();
    ++out.audits;
    fill_row(out, p, core, sim);
    out.row.asmc_messages = unit.stats().asmc_messages;
    out.amu = unit.stats();
    out.runtime = runtime.stats();
  }
  if (sim.stats().net_inflight_delta() != 0) {
    throw InvariantViolation(fmt::format("in-flight deltas sum to {} at the end of the run",
                                         sim.stats().net_inflight_delta()));
  }
  const work::VerifyResult v = wl->verify();
  out.row.verify = v.pass;
  out.verify_detail = v.detail;
  out.verify_mismatches = v.mismatches;
  out.memory = hier.stats();
  out.far_packets = hier.far_link().packets();
  out.far_bytes = hier.far_link().bytes();
  out.peak_l1_mshr = hier.l1_mshr().peak_in_use();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  spdlog::debug("{:>9} {:<12} {:>6}ns cycles={} mlp={:.1f} ipc={:.3f} verify={} ({:.2f}s)", out.row.mode,
               out.row.benchmark, out.row.latency_ns, out.row.exec_cycles, out.row.mlp, out.row.ipc,
               out.row.verify ? "pass" : "fail", out.wall_seconds);
  return out;
}

std::vector<PointConfig> sweep_points(const ExperimentConfig& cfg) {
  std::vector<PointConfig> points;
  for (const auto& b : cfg.benchmarks) {
    for (Mode m : cfg.modes) {
      for (double l : cfg.latencies_ns) points.push_back(resolve_point(cfg, m, b, l));
    }
  }
  return points;
}

std::vector<PointResult> run_sweep(const ExperimentConfig& cfg, const Progress& progress) {
  cfg.validate();
  const auto points = sweep_points(cfg);
  std::vector<PointResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_point(points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      const std::size_t d = ++done;
      if (progress && !errors[i]) {
        std::lock_guard lock(progress_mu);
        progress(results[i], d, points.size());
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(cfg.jobs, points.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ResultRow> rows;
  for (const auto& r : results) rows.push_back(r.row);
  normalize(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) results[i].row = rows[i];
  return results;
}

std::string json_summary(const ExperimentConfig& cfg, const std::vector<PointResult>& results) {
  using nlohmann::json;
  json doc;
  doc["seed"] = cfg.seed;
  json modes = json::object();
  std::map<std::string, std::vector<const PointResult*>> by_mode;
  for (const auto& r : results) by_mode[r.row.mode].push_back(&r);
  for (const auto& [mode, rs] : by_mode) {
    double log_sum = 0.0;
    double mlp_sum = 0.0;
    double ipc_sum = 0.0;
    std::uint64_t pass = 0;
    std::uint64_t msgs = 0;
    for (const auto* r : rs) {
      log_sum += std::log(static_cast<double>(std::max<Cycle>(r->row.exec_cycles, 1)));
      mlp_sum += r->row.mlp;
      ipc_sum += r->row.ipc;
      pass += r->row.verify ? 1 : 0;
      msgs += r->row.asmc_messages;
    }
    const auto n = static_cast<double>(rs.size());
    modes[mode] = {{"points", rs.size()},
                   {"verify_pass", pass},
                   {"geomean_exec_cycles", std::exp(log_sum / n)},
                   {"mean_mlp", mlp_sum / n},
                   {"mean_ipc", ipc_sum / n},
                   {"asmc_messages", msgs}};
  }
  doc["modes"] = modes;
  json pts = json::array();
  for (const auto& r : results) {
    json p = {{"mode", r.row.mode},
              {"benchmark", r.row.benchmark},
              {"latency_ns", r.row.latency_ns},
              {"exec_cycles", r.row.exec_cycles},
              {"mlp", r.row.mlp},
              {"ipc", r.row.ipc},
              {"asmc_messages", r.row.asmc_messages},
              {"guard_time_fraction", r.row.guard_time_fraction},
              {"verify", r.row.verify},
              {"verify_detail", r.verify_detail},
              {"committed", r.core.committed},
              {"squashes", r.core.squashes},
              {"far_packets", r.far_packets},
              {"peak_outstanding", r.peak_outstanding},
              {"wall_seconds", r.wall_seconds}};
    if (r.row.normalized_time) p["normalized_time"] = *r.row.normalized_time;
    const auto& cat = r.core.cycles_by_category;
    p["head_cycles"] = {{"app", cat[0]}, {"runtime", cat[1]}, {"guard", cat[2]}, {"idle", cat[3]}};
    p["runtime"] = {{"getfin_calls", r.runtime.getfin_calls},
                    {"getfin_empty", r.runtime.getfin_empty},
                    {"idle_waits", r.runtime.idle_waits},
                    {"switches", r.runtime.switches},
                    {"alloc_failures", r.runtime.alloc_failures},
                    {"guard_contended", r.runtime.guard_contended}};
    pts.push_back(std::move(p));
  }
  doc["points"] = pts;
  return doc.dump(2) + "\n";
}

}  // namespace amusim::exp
