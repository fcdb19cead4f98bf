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

#include "amusim/exp/results.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

namespace amusim::exp {

void normalize(std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, std::uint64_t>, Cycle> reference;
  for (const auto& r : rows) {
    if (r.mode == "baseline" && r.latency_ns == 100.0 && r.exec_cycles > 0) {
      reference.emplace(std::make_pair(r.benchmark, r.seed), r.exec_cycles);
    }
  }
  for (auto& r : rows) {
    auto it = reference.find({r.benchmark, r.seed});
    if (it == reference.end()) {
      r.normalized_time.reset();
    } else {
      r.normalized_time = static_cast<double>(r.exec_cycles) / static_cast<double>(it->second);
    }
  }
}

std::string csv_line(const ResultRow& r) {
  return fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{},{:.6f},{}", r.mode, r.benchmark, r.latency_ns, r.seed,
                     r.exec_cycles, r.normalized_time ? fmt::format("{:.6f}", *r.normalized_time) : std::string(),
                     r.mlp, r.ipc, r.asmc_messages, r.guard_time_fraction, r.verify ? "pass" : "fail");
}

std::string csv_body(const std::vector<ResultRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += csv_line(r);
    out += '\n';
  }
  return out;
}

void append_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError(fmt::format("cannot open '{}' for writing", path));
  if (fresh) out << kCsvHeader << '\n';
  out << csv_body(rows);
  if (!out) throw ConfigError(fmt::format("write to '{}' failed", path));
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError(fmt::format("'{}' does not start with the expected header", path));
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw ConfigError(fmt::format("'{}': row has {} fields, expected 11", path, f.size()));
    ResultRow r;
    try {
      r.mode = f[0];
      r.benchmark = f[1];
      r.latency_ns = std::stod(f[2]);
      r.seed = std::stoull(f[3]);
      r.exec_cycles = std::stoull(f[4]);
      if (!f[5].empty()) r.normalized_time = std::stod(f[5]);
      r.mlp = std::stod(f[6]);
      r.ipc = std::stod(f[7]);
      r.asmc_messages = std::stoull(f[8]);
      r.guard_time_fraction = std::stod(f[9]);
      r.verify = f[10] == "pass";
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("'{}': malformed row '{}'", path, line));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace amusim::exp
