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

#include "amusim/mem/memory_image.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace amusim::mem {

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::local: return "local";
    case RegionKind::far: return "far";
    case RegionKind::spm: return "spm";
  }
  return "?";
}

void MemoryImage::map_region(RegionKind kind, Addr base, std::uint64_t size) {
  if (size == 0) throw ConfigError("region size must be nonzero");
  for (const Region& r : regions_) {
    const bool disjoint = base + size <= r.base || r.base + r.size <= base;
    if (!disjoint) {
      throw ConfigError(fmt::format("{} region [{:#x}, +{:#x}) overlaps {} region at {:#x}",
                                    to_string(kind), base, size, to_string(r.kind), r.base));
    }
  }
  regions_.push_back(Region{base, size, kind});
  bump_.push_back(base);
}

const Region& MemoryImage::region_of(Addr addr, std::uint64_t bytes) const {
  for (const Region& r : regions_) {
    if (r.contains(addr, bytes)) return r;
  }
  throw SimFault(fmt::format("access to unmapped address range [{:#x}, +{})", addr, bytes));
}

std::optional<RegionKind> MemoryImage::kind_of(Addr addr) const noexcept {
  for (const Region& r : regions_) {
    if (r.contains(addr, 1)) return r.kind;
  }
  return std::nullopt;
}

const Region& MemoryImage::checked_backing(Addr addr, std::uint64_t bytes) const {
  const Region& r = region_of(addr, bytes);
  if (r.kind == RegionKind::spm) {
    throw SimFault(fmt::format("address {:#x} lies in the SPM window, which the image does not back", addr));
  }
  return r;
}

const MemoryImage::Page* MemoryImage::find_page(std::uint64_t page) const {
  if (page == last_page_) return last_ptr_;
  auto it = pages_.find(page);
  if (it == pages_.end()) return nullptr;
  last_page_ = page;
  last_ptr_ = it->second.get();
  return last_ptr_;
}

MemoryImage::Page& MemoryImage::touch_page(std::uint64_t page) {
  if (page == last_page_) return *last_ptr_;
  auto& slot = pages_[page];
  if (!slot) {
    slot = std::make_unique<Page>();
    slot->fill(0);
  }
  last_page_ = page;
  last_ptr_ = slot.get();
  return *slot;
}

void MemoryImage::read(Addr addr, std::span<std::uint8_t> out) const {
  if (out.empty()) return;
  checked_backing(addr, out.size());
  std::size_t done = 0;
  while (done < out.size()) {
    const Addr a = addr + done;
    const std::uint64_t off = a % kPageBytes;
    const std::size_t n = std::min<std::size_t>(out.size() - done, kPageBytes - off);
    const Page* p = find_page(a / kPageBytes);
    if (p) {
      std::memcpy(out.data() + done, p->data() + off, n);
    } else {
      std::memset(out.data() + done, 0, n);
    }
    done += n;
  }
}

void MemoryImage::write(Addr addr, std::span<const std::uint8_t> in) {
  if (in.empty()) return;
  checked_backing(addr, in.size());
  std::size_t done = 0;
  while (done < in.size()) {
    const Addr a = addr + done;
    const std::uint64_t off = a % kPageBytes;
    const std::size_t n = std::min<std::size_t>(in.size() - done, kPageBytes - off);
    std::memcpy(touch_page(a / kPageBytes).data() + off, in.data() + done, n);
    done += n;
  }
}

Addr MemoryImage::allocate(RegionKind kind, std::uint64_t bytes, std::uint64_t align) {
  if (align == 0 || (align & (align - 1)) != 0) throw ConfigError("alignment must be a power of two");
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const Region& r = regions_[i];
    if (r.kind != kind || kind == RegionKind::spm) continue;
    const Addr start = (bump_[i] + align - 1) & ~(align - 1);
    if (start + bytes > r.base + r.size) {
      throw ConfigError(fmt::format("{} region exhausted allocating {} bytes", to_string(kind), bytes));
    }
    bump_[i] = start + bytes;
    return start;
  }
  throw ConfigError(fmt::format("no {} region mapped", to_string(kind)));
}

std::uint64_t MemoryImage::allocated_bytes(RegionKind kind) const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].kind == kind) total += bump_[i] - regions_[i].base;
  }
  return total;
}

void Spm::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (!in_range(offset, out.size())) {
    throw SimFault(fmt::format("SPM access [{:#x}, +{}) outside {}-byte scratchpad", offset, out.size(), bytes_.size()));
  }
  if (!out.empty()) std::memcpy(out.data(), bytes_.data() + offset, out.size());
}

void Spm::write(std::uint64_t offset, std::span<const std::uint8_t> in) {
  if (!in_range(offset, in.size())) {
    throw SimFault(fmt::format("SPM access [{:#x}, +{}) outside {}-byte scratchpad", offset, in.size(), bytes_.size()));
  }
  if (!in.empty()) std::memcpy(bytes_.data() + offset, in.data(), in.size());
}

}  // namespace amusim::mem
