#include "lirav/pmp.hpp"

#include <bit>
#include <string>

#include "lirav/error.hpp"

namespace lirav {

std::uint8_t PmpConfig::encode() const noexcept {
  std::uint8_t b = 0;
  if (read) b |= 0x01;
  if (write) b |= 0x02;
  if (execute) b |= 0x04;
  b |= static_cast<std::uint8_t>(static_cast<std::uint8_t>(mode) << 3);
  if (lock) b |= 0x80;
  return b;
}

PmpConfig PmpConfig::decode(std::uint8_t byte) {
  if (byte & 0x60) throw Error(Errc::InvalidConfig, "pmpcfg bits 5-6 must be zero");
  PmpConfig c;
  c.read = byte & 0x01;
  c.write = byte & 0x02;
  c.execute = byte & 0x04;
  c.mode = static_cast<AddrMode>((byte >> 3) & 0x03);
  c.lock = byte & 0x80;
  return c;
}

std::uint32_t napot_encode(std::uint64_t base, std::uint64_t size) {
  if (size < 8 || !std::has_single_bit(size) || (base & (size - 1)) != 0) {
    throw Error(Errc::InvalidConfig, "NAPOT region must be a naturally aligned power of two >= 8");
  }
  return static_cast<std::uint32_t>((base >> 2) | ((size >> 3) - 1));
}

void PmpBank::configure(std::size_t index, const PmpConfig& config, std::uint32_t addr_reg) {
  if (index >= kEntries) throw Error(Errc::OutOfRange, "PMP index out of range");
  if (config.reserved()) {
    throw Error(Errc::ReservedCombination, "PMP entry " + std::to_string(index) + ": R=0,W=1 is reserved");
  }
  if (entries_[index].config.lock) {
    throw Error(Errc::LockedEntry, "PMP entry " + std::to_string(index) + " is locked");
  }
  if (index + 1 < kEntries) {
    const auto& above = entries_[index + 1].config;
    if (above.lock && above.mode == AddrMode::Tor) {
      throw Error(Errc::LockedEntry,
                  "PMP entry " + std::to_string(index) + " is pinned by locked TOR entry above");
    }
  }
  entries_[index] = PmpEntry{config, addr_reg};
}

std::optional<AddressRange> PmpBank::match_range(std::size_t index) const {
  const PmpEntry& e = entries_.at(index);
  const std::uint64_t addr = e.addr_reg;
  switch (e.config.mode) {
    case AddrMode::Off:
      return std::nullopt;
    case AddrMode::Na4:
      return AddressRange{addr << 2, (addr << 2) + 3};
    case AddrMode::Tor: {
      std::uint64_t prev = index == 0 ? 0 : entries_[index - 1].addr_reg;
      if (addr <= prev) return std::nullopt;
      return AddressRange{prev << 2, (addr << 2) - 1};
    }
    case AddrMode::Napot: {
      // k trailing ones select a 2^(k+3)-byte region.
      const int ones = std::countr_one(e.addr_reg);
      const std::uint64_t size = std::uint64_t{1} << (ones + 3);
      const std::uint64_t base = ((addr << 2) & ~(size - 1));
      return AddressRange{base, base + size - 1};
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> PmpBank::matching_entry(std::uint64_t addr) const noexcept {
  for (std::size_t i = 0; i < kEntries; ++i) {
    auto range = match_range(i);
    if (range && range->contains(addr)) return i;
  }
  return std::nullopt;
}

AccessVerdict PmpBank::check(Access access, std::uint64_t addr, ExecutionContext) const noexcept {
  // Both execution contexts are machine mode, so the rule set is identical.
  auto index = matching_entry(addr);
  if (!index) return AccessVerdict::Allow;
  const PmpConfig& c = entries_[*index].config;
  if (!c.lock) return AccessVerdict::Allow;
  bool permitted = false;
  switch (access) {
    case Access::Read: permitted = c.read; break;
    case Access::Write: permitted = c.write; break;
    case Access::Execute: permitted = c.execute; break;
  }
  return permitted ? AccessVerdict::Allow : AccessVerdict::Deny;
}

}  // namespace lirav
