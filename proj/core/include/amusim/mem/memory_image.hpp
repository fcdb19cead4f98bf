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

#include <array>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "amusim/common.hpp"

namespace amusim::mem {

enum class RegionKind : std::uint8_t { local, far, spm };

std::string_view to_string(RegionKind kind);

/// Default placement of the three address windows.
inline constexpr Addr kSpmBase = 0x0800'0000ULL;
inline constexpr Addr kLocalBase = 0x1000'0000ULL;
inline constexpr Addr kFarBase = 0x10'0000'0000ULL;
inline constexpr std::uint64_t kDefaultLocalBytes = 1ULL << 30;
inline constexpr std::uint64_t kDefaultFarBytes = 16ULL << 30;

struct Region {
  Addr base;
  std::uint64_t size;
  RegionKind kind;

  bool contains(Addr addr, std::uint64_t bytes) const {
    return addr >= base && bytes <= size && addr - base <= size - bytes;
  }
};

/// Sparse functional backing store for local and far memory, plus the region
/// map. Never-written bytes read as zero. The SPM window is registered in the
/// map for routing but its bytes live in mem::Spm.
class MemoryImage {
 public:
  static constexpr std::uint64_t kPageBytes = 4096;

  MemoryImage() = default;
  MemoryImage(const MemoryImage&) = delete;
  MemoryImage& operator=(const MemoryImage&) = delete;

  /// Throws ConfigError if the new region overlaps an existing one.
  void map_region(RegionKind kind, Addr base, std::uint64_t size);

  /// Region fully containing [addr, addr+bytes). Throws SimFault otherwise.
  const Region& region_of(Addr addr, std::uint64_t bytes = 1) const;
  std::optional<RegionKind> kind_of(Addr addr) const noexcept;
  const std::vector<Region>& regions() const { return regions_; }

  void read(Addr addr, std::span<std::uint8_t> out) const;
  void write(Addr addr, std::span<const std::uint8_t> in);

  template <typename T>
  T load(Addr addr) const {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    read(addr, std::span<std::uint8_t>(reinterpret_cast<std::uint8_t*>(&v), sizeof(T)));
    return v;
  }
  template <typename T>
  void store(Addr addr, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write(addr, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(&v), sizeof(T)));
  }

  /// Bump allocation inside a mapped local or far region.
  Addr allocate(RegionKind kind, std::uint64_t bytes, std::uint64_t align = 64);
  std::uint64_t allocated_bytes(RegionKind kind) const;

  std::size_t resident_pages() const { return pages_.size(); }

 private:
  using Page = std::array<std::uint8_t, kPageBytes>;

  const Region& checked_backing(Addr addr, std::uint64_t bytes) const;
  const Page* find_page(std::uint64_t page) const;
  Page& touch_page(std::uint64_t page);

  std::vector<Region> regions_;
  std::vector<Addr> bump_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
  mutable std::uint64_t last_page_ = ~0ULL;
  mutable Page* last_ptr_ = nullptr;
};

/// Scratchpad bytes carved from L2. Offsets are SPM-relative.
class Spm {
 public:
  explicit Spm(std::uint32_t bytes = 0) : bytes_(bytes, 0) {}

  std::uint32_t size() const { return static_cast<std::uint32_t>(bytes_.size()); }
  bool in_range(std::uint64_t offset, std::uint64_t bytes) const {
    return bytes <= bytes_.size() && offset <= bytes_.size() - bytes;
  }

  /// Both throw SimFault when the range leaves the scratchpad.
  void read(std::uint64_t offset, std::span<std::uint8_t> out) const;
  void write(std::uint64_t offset, std::span<const std::uint8_t> in);

  template <typename T>
  T load(std::uint64_t offset) const {
    T v;
    read(offset, std::span<std::uint8_t>(reinterpret_cast<std::uint8_t*>(&v), sizeof(T)));
    return v;
  }
  template <typename T>
  void store(std::uint64_t offset, const T& v) {
    write(offset, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(&v), sizeof(T)));
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

}  // namespace amusim::mem
