#include "lirav/memory.hpp"

#include <algorithm>

#include "lirav/error.hpp"

namespace lirav {

std::string_view to_string(RegionKind kind) noexcept {
  switch (kind) {
    case RegionKind::Rom: return "rom";
    case RegionKind::Flash: return "flash";
    case RegionKind::Sram: return "sram";
  }
  return "?";
}

void MemoryImage::add_region(MemoryRegion region) {
  if (region.bytes.empty()) throw Error(Errc::InvalidConfig, "empty memory region");
  if (region.end() > (std::uint64_t{1} << 32)) {
    throw Error(Errc::InvalidConfig, "memory region exceeds the 32-bit address space");
  }
  for (const auto& r : regions_) {
    if (region.base < r.end() && r.base < region.end()) {
      throw Error(Errc::InvalidConfig, "overlapping memory regions");
    }
  }
  auto pos = std::lower_bound(regions_.begin(), regions_.end(), region.base,
                              [](const MemoryRegion& r, std::uint32_t base) { return r.base < base; });
  regions_.insert(pos, std::move(region));
}

const MemoryRegion* MemoryImage::find(std::uint64_t addr, std::uint64_t len) const noexcept {
  for (const auto& r : regions_) {
    if (r.contains(addr, len)) return &r;
  }
  return nullptr;
}

MemoryRegion* MemoryImage::find(std::uint64_t addr, std::uint64_t len) noexcept {
  for (auto& r : regions_) {
    if (r.contains(addr, len)) return &r;
  }
  return nullptr;
}

ByteView MemoryImage::span(std::uint64_t addr, std::uint64_t len) const {
  const MemoryRegion* r = find(addr, len);
  if (!r) throw Error(Errc::OutOfRange, "address range not mapped");
  return ByteView(r->bytes).subspan(addr - r->base, len);
}

std::span<std::uint8_t> MemoryImage::mutable_span(std::uint64_t addr, std::uint64_t len) {
  MemoryRegion* r = find(addr, len);
  if (!r) throw Error(Errc::OutOfRange, "address range not mapped");
  return std::span<std::uint8_t>(r->bytes).subspan(addr - r->base, len);
}

void MemoryImage::zero(RegionKind kind) noexcept {
  for (auto& r : regions_) {
    if (r.kind == kind) std::fill(r.bytes.begin(), r.bytes.end(), std::uint8_t{0});
  }
}

}  // namespace lirav
