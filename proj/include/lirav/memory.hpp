#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "lirav/bytes.hpp"

namespace lirav {

enum class RegionKind { Rom, Flash, Sram };

std::string_view to_string(RegionKind kind) noexcept;

struct MemoryRegion {
  std::uint32_t base = 0;
  RegionKind kind = RegionKind::Sram;
  Bytes bytes;

  std::uint64_t end() const noexcept { return std::uint64_t{base} + bytes.size(); }
  bool contains(std::uint64_t addr, std::uint64_t len) const noexcept {
    return addr >= base && addr + len <= end() && addr + len >= addr;
  }
};

/// Flat physical memory map of non-overlapping regions sorted by base.
class MemoryImage {
 public:
  MemoryImage() = default;

  /// Inserts a region, keeping the list sorted. Throws InvalidConfig on
  /// overlap, an empty region, or one that runs past 4 GiB.
  void add_region(MemoryRegion region);

  const std::vector<MemoryRegion>& regions() const noexcept { return regions_; }

  /// The region holding all of [addr, addr+len); nullptr when unmapped or
  /// when the span crosses a region boundary.
  const MemoryRegion* find(std::uint64_t addr, std::uint64_t len) const noexcept;
  MemoryRegion* find(std::uint64_t addr, std::uint64_t len) noexcept;

  /// Raw view, no access control. Throws OutOfRange.
  ByteView span(std::uint64_t addr, std::uint64_t len) const;
  std::span<std::uint8_t> mutable_span(std::uint64_t addr, std::uint64_t len);

  /// Zeroes every region of the given kind.
  void zero(RegionKind kind) noexcept;

 private:
  std::vector<MemoryRegion> regions_;
};

}  // namespace lirav
