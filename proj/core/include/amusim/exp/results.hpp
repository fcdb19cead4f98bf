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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amusim/common.hpp"

namespace amusim::exp {

/// One CSV row. Column order is a stable contract for downstream tooling.
struct ResultRow {
  std::string mode;
  std::string benchmark;
  double latency_ns = 0.0;
  std::uint64_t seed = 0;
  Cycle exec_cycles = 0;
  /// exec_cycles over the baseline row at 100 ns for the same benchmark and
  /// seed; empty when the sweep has no such row.
  std::optional<double> normalized_time;
  double mlp = 0.0;
  double ipc = 0.0;
  std::uint64_t asmc_messages = 0;
  double guard_time_fraction = 0.0;
  bool verify = false;
};

inline constexpr std::string_view kCsvHeader =
    "mode,benchmark,latency_ns,seed,exec_cycles,normalized_time,mlp,ipc,asmc_messages,guard_time_fraction,verify";

/// Fills normalized_time for every row that has a reference row.
void normalize(std::vector<ResultRow>& rows);

std::string csv_line(const ResultRow& row);
/// Rows only, one line each, no header.
std::string csv_body(const std::vector<ResultRow>& rows);
/// Appends rows to `path`; writes the header first if the file is new or empty.
void append_csv(const std::string& path, const std::vector<ResultRow>& rows);
/// Parses a CSV produced by append_csv. Throws ConfigError on a header mismatch.
std::vector<ResultRow> read_csv(const std::string& path);

}  // namespace amusim::exp
