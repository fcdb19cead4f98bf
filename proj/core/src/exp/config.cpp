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

#include "amusim/exp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

namespace amusim::exp {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::baseline: return "baseline";
    case Mode::cxl_ideal: return "cxl_ideal";
    case Mode::amu: return "amu";
    case Mode::amu_dma: return "amu_dma";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::baseline;
  if (s == "cxl_ideal") return Mode::cxl_ideal;
  if (s == "amu") return Mode::amu;
  if (s == "amu_dma") return Mode::amu_dma;
  throw ConfigError(fmt::format("mode: unknown mode '{}' (known: baseline, cxl_ideal, amu, amu_dma)", s));
}

bool is_amu(Mode m) { return m == Mode::amu || m == Mode::amu_dma; }

void ExperimentConfig::validate() const {
  if (modes.empty()) throw ConfigError("mode: at least one mode is required");
  if (benchmarks.empty()) throw ConfigError("benchmark: at least one benchmark is required");
  if (latencies_ns.empty()) throw ConfigError("latencies_ns: at least one latency is required");
  for (double l : latencies_ns) {
    if (!(l >= 0.0)) throw ConfigError(fmt::format("latencies_ns: {} is not a non-negative latency", l));
  }
  if (!(frequency_ghz > 0.0)) throw ConfigError("frequency_ghz must be positive");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (speculation.squash_probability < 0.0 || speculation.squash_probability > 1.0) {
    throw ConfigError("speculation.squash_probability must be in [0, 1]");
  }
  core.validate();
  memory.validate();
  amu.validate();
  guard.validate();
  for (const auto& b : benchmarks) work::default_knobs(b);
  for (const auto& [bench, knobs] : workload) {
    const work::Knobs defaults = work::default_knobs(bench);
    for (const auto& [k, v] : knobs) {
      if (!defaults.count(k)) {
        std::vector<std::string> keys;
        for (const auto& kv : defaults) keys.push_back(kv.first);
        throw ConfigError(fmt::format("workload.{}.{}: unknown knob (known: {})", bench, k, fmt::join(keys, ", ")));
      }
      if (v < 1) throw ConfigError(fmt::format("workload.{}.{} must be positive", bench, k));
    }
  }
}

namespace {

/// Reads a YAML map, remembering which keys were used so leftovers can be
/// reported as unknown fields.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsMap() && !node_.IsNull()) throw ConfigError(fmt::format("{}: expected a mapping", label()));
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    used_.insert(key);
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(fmt::format("{}: cannot read '{}' as the expected type", field(key), YAML::Dump(node_[key])));
    }
  }

  YAML::Node child(const std::string& key) {
    if (!has(key)) return YAML::Node();
    used_.insert(key);
    return node_[key];
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError(fmt::format("{}: unknown field", field(key)));
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<std::string> string_or_list(const YAML::Node& n, const std::string& field) {
  std::vector<std::string> out;
  try {
    if (n.IsScalar()) {
      out.push_back(n.as<std::string>());
    } else if (n.IsSequence()) {
      for (const auto& x : n) out.push_back(x.as<std::string>());
    } else {
      throw ConfigError(fmt::format("{}: expected a name or a list of names", field));
    }
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: expected a name or a list of names", field));
  }
  return out;
}

void read_cache_level(MapReader& parent, const std::string& key, mem::CacheLevelConfig& c) {
  MapReader r(parent.child(key), parent.field(key));
  r.get("capacity_bytes", c.capacity_bytes);
  r.get("associativity", c.associativity);
  r.get("line_bytes", c.line_bytes);
  r.get("hit_delay_cycles", c.hit_delay_cycles);
  r.get("mshr_entries", c.mshr_entries);
  r.finish();
}

void apply_override(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}': expected key=value", spec));
  }
  const std::string key = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ConfigError(fmt::format("override '{}': empty path component", spec));
    parts.push_back(p);
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("override '{}': cannot parse value: {}", spec, e.what()));
  }
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cur[parts[i]];
    if (!next || !next.IsMap()) {
      cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = cur[parts[i]];
    }
    cur.reset(next);
  }
  cur[parts.back()] = parsed;
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config: YAML syntax error: {}", e.what()));
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  ExperimentConfig cfg;
  MapReader top(root, "");

  if (top.has("mode") && top.has("modes")) throw ConfigError("mode: give either 'mode' or 'modes', not both");
  for (const char* key : {"mode", "modes"}) {
    if (top.has(key)) {
      cfg.modes.clear();
      for (const auto& m : string_or_list(top.child(key), key)) cfg.modes.push_back(parse_mode(m));
    }
  }
  if (top.has("benchmark") && top.has("benchmarks")) {
    throw ConfigError("benchmark: give either 'benchmark' or 'benchmarks', not both");
  }
  for (const char* key : {"benchmark", "benchmarks"}) {
    if (top.has(key)) cfg.benchmarks = string_or_list(top.child(key), key);
  }
  if (top.has("latencies_ns")) {
    const YAML::Node n = top.child("latencies_ns");
    cfg.latencies_ns.clear();
    try {
      if (n.IsScalar()) {
        cfg.latencies_ns.push_back(n.as<double>());
      } else {
        for (const auto& x : n) cfg.latencies_ns.push_back(x.as<double>());
      }
    } catch (const YAML::Exception&) {
      throw ConfigError("latencies_ns: expected a number or a list of numbers");
    }
  }
  top.get("seed", cfg.seed);
  top.get("frequency_ghz", cfg.frequency_ghz);
  top.get("jobs", cfg.jobs);

  {
    MapReader r(top.child("core"), "core");
    r.get("rob_entries", cfg.core.rob_entries);
    r.get("lsq_entries", cfg.core.lsq_entries);
    r.get("issue_width", cfg.core.issue_width);
    r.get("commit_width", cfg.core.commit_width);
    r.get("coroutine_switch_cycles", cfg.core.coroutine_switch_cycles);
    r.finish();
  }
  {
    MapReader r(top.child("cache"), "cache");
    read_cache_level(r, "l1", cfg.memory.l1);
    read_cache_level(r, "l2", cfg.memory.l2);
    std::string prefetcher = cfg.memory.stream_prefetcher ? "stream" : "none";
    r.get("prefetcher", prefetcher);
    if (prefetcher != "none" && prefetcher != "stream") {
      throw ConfigError(fmt::format("cache.prefetcher: '{}' is not one of none, stream", prefetcher));
    }
    cfg.memory.stream_prefetcher = prefetcher == "stream";
    r.get("prefetch_degree", cfg.memory.prefetch_degree);
    r.get("prefetch_history", cfg.memory.prefetch_history);
    r.finish();
  }
  {
    MapReader r(top.child("dram"), "dram");
    r.get("latency_ns", cfg.memory.dram_latency_ns);
    r.finish();
  }
  {
    MapReader r(top.child("far"), "far");
    r.get("bandwidth_bytes_per_ns", cfg.memory.far.bandwidth_bytes_per_ns);
    r.get("per_packet_overhead_ns", cfg.memory.far.per_packet_overhead_ns);
    r.finish();
  }
  {
    MapReader r(top.child("amu"), "amu");
    r.get("spm_bytes", cfg.amu.spm_bytes);
    r.get("spm_delay_cycles", cfg.memory.spm_delay_cycles);
    r.get("list_capacity", cfg.amu.list_capacity);
    r.get("speculative_id_ops", cfg.amu.speculative_id_ops);
    r.get("hop_cycles", cfg.amu.hop_cycles);
    r.get("register_cache_depth", cfg.amu.register_cache_depth);
    r.get("register_cache_miss_cycles", cfg.amu.register_cache_miss_cycles);
    r.get("recycle_capacity", cfg.amu.recycle_capacity);
    r.get("uncommitted_registers", cfg.amu.uncommitted_registers);
    r.get("audit_every_op", cfg.amu.audit_every_op);
    r.finish();
  }
  {
    MapReader r(top.child("guard"), "guard");
    r.get("tables", cfg.guard.tables);
    r.get("buckets", cfg.guard.buckets);
    r.get("bucket_bytes", cfg.guard.bucket_bytes);
    r.finish();
  }
  {
    MapReader r(top.child("speculation"), "speculation");
    r.get("squash_probability", cfg.speculation.squash_probability);
    r.get("squash_max_depth", cfg.speculation.squash_max_depth);
    r.get("squash_limit", cfg.speculation.squash_limit);
    r.get("audit_on_squash", cfg.speculation.audit_on_squash);
    r.finish();
  }
  {
    MapReader r(top.child("sim"), "sim");
    r.get("cycle_cap", cfg.cycle_cap);
    r.finish();
  }
  {
    MapReader r(top.child("output"), "output");
    r.get("csv", cfg.csv_path);
    r.get("json", cfg.json_path);
    r.finish();
  }
  if (top.has("workload")) {
    const YAML::Node w = top.child("workload");
    if (!w.IsMap()) throw ConfigError("workload: expected a mapping of benchmark name to knobs");
    for (const auto& kv : w) {
      const auto bench = kv.first.as<std::string>();
      if (!kv.second.IsMap()) throw ConfigError(fmt::format("workload.{}: expected a mapping of knobs", bench));
      for (const auto& k : kv.second) {
        const auto knob = k.first.as<std::string>();
        try {
          cfg.workload[bench][knob] = k.second.as<std::int64_t>();
        } catch (const YAML::Exception&) {
          throw ConfigError(fmt::format("workload.{}.{}: expected an integer", bench, knob));
        }
      }
    }
  }
  top.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

PointConfig resolve_point(const ExperimentConfig& cfg, Mode mode, const std::string& benchmark, double latency_ns) {
  PointConfig p;
  p.mode = mode;
  p.benchmark = benchmark;
  p.latency_ns = latency_ns;
  p.seed = cfg.seed;
  p.frequency_ghz = cfg.frequency_ghz;
  p.cycle_cap = cfg.cycle_cap;
  p.core = cfg.core;
  p.memory = cfg.memory;
  p.memory.far.base_latency_ns = latency_ns;
  p.amu = cfg.amu;
  p.guard = cfg.guard;
  p.speculation = cfg.speculation;
  if (auto it = cfg.workload.find(benchmark); it != cfg.workload.end()) p.knobs = it->second;

  p.core.squash_probability = 0.0;
  p.memory.spm_bytes = 0;
  switch (mode) {
    case Mode::baseline:
      break;
    case Mode::cxl_ideal:
      p.memory.l1.mshr_entries = 256;
      p.memory.l2.mshr_entries = 256;
      p.memory.stream_prefetcher = true;
      break;
    case Mode::amu_dma:
      p.amu.list_capacity = 1;
      p.amu.speculative_id_ops = false;
      [[fallthrough]];
    case Mode::amu: {
      if (p.amu.spm_bytes >= p.memory.l2.capacity_bytes) {
        throw ConfigError(fmt::format("amu.spm_bytes {} must be smaller than the L2 ({} bytes)", p.amu.spm_bytes,
                                      p.memory.l2.capacity_bytes));
      }
      p.memory.spm_bytes = p.amu.spm_bytes;
      p.memory.l2.capacity_bytes -= p.amu.spm_bytes;
      p.core.speculative_ami = p.amu.speculative_id_ops;
      p.core.squash_probability = p.speculation.squash_probability;
      p.core.squash_max_depth = p.speculation.squash_max_depth;
      p.core.squash_limit = p.speculation.squash_limit;
      break;
    }
  }
  p.memory.validate();
  return p;
}

}  // namespace amusim::exp
