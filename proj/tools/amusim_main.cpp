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

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "amusim/common.hpp"
#include "amusim/exp/config.hpp"
#include "amusim/exp/experiment.hpp"
#include "amusim/exp/results.hpp"
#include "amusim/work/workload.hpp"

namespace {

/// Exit codes: 0 success, 1 verify failure, 2 usage or config error,
/// 3 simulation fault.
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kFault = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("amusim");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  spdlog::set_pattern("[%l] %v");
  // AMUSIM_LOG=debug|info|warn|error|off
  if (const char* lvl = std::getenv("AMUSIM_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

int run(const std::string& config_path, const std::string& out, const std::string& json, std::int64_t seed,
        std::uint32_t jobs, std::vector<std::string> overrides) {
  using namespace amusim;
  if (seed >= 0) overrides.push_back(fmt::format("seed={}", seed));
  exp::ExperimentConfig cfg = exp::load_config(config_path, overrides);
  if (!out.empty()) cfg.csv_path = out;
  if (!json.empty()) cfg.json_path = json;
  if (jobs > 0) cfg.jobs = jobs;
  cfg.validate();

  const auto results = exp::run_sweep(cfg, [](const exp::PointResult& r, std::size_t done, std::size_t total) {
    spdlog::info("[{}/{}] {} {} {}ns done", done, total, r.row.mode, r.row.benchmark, r.row.latency_ns);
  });
  std::vector<exp::ResultRow> rows;
  bool all_pass = true;
  for (const auto& r : results) {
    rows.push_back(r.row);
    if (!r.row.verify) {
      all_pass = false;
      spdlog::error("verify failed: {} {} {}ns: {}", r.row.mode, r.row.benchmark, r.row.latency_ns, r.verify_detail);
    }
  }
  if (cfg.csv_path.empty()) {
    std::cout << exp::kCsvHeader << '\n' << exp::csv_body(rows);
  } else {
    exp::append_csv(cfg.csv_path, rows);
  }
  if (!cfg.json_path.empty()) {
    std::ofstream f(cfg.json_path);
    if (!f) throw ConfigError(fmt::format("cannot open '{}' for writing", cfg.json_path));
    f << exp::json_summary(cfg, results);
  }
  return all_pass ? 0 : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"amusim: cycle-approximate far-memory simulator with an asynchronous memory unit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string json;
  std::int64_t seed = -1;
  std::uint32_t jobs = 0;
  std::vector<std::string> overrides;
  auto* run_cmd = app.add_subcommand("run", "Run every (mode, benchmark, latency) point of a config");
  run_cmd->add_option("-c,--config", config_path, "YAML experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--out", out, "CSV file to append rows to (default: print to stdout)");
  run_cmd->add_option("--json", json, "Write a per-mode JSON summary to this path");
  run_cmd->add_option("--seed", seed, "Override the config seed")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("-j,--jobs", jobs, "Points simulated concurrently");
  run_cmd->add_option("--override", overrides, "Set a config field, e.g. core.rob_entries=256 (repeatable)");

  auto* list_cmd = app.add_subcommand("benchmarks", "List benchmark names and their default knobs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse error is a usage error.
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : amusim::work::benchmark_names()) {
        std::cout << name << ':';
        for (const auto& [k, v] : amusim::work::default_knobs(name)) std::cout << ' ' << k << '=' << v;
        std::cout << '\n';
      }
      return 0;
    }
    return run(config_path, out, json, seed, jobs, overrides);
  } catch (const amusim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return kFault;
  }
}
