#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace lirav {

/// PMP address-matching mode (the two-bit A field of pmpcfg).
enum class AddrMode : std::uint8_t { Off = 0, Tor = 1, Na4 = 2, Napot = 3 };

enum class Access { Read, Write, Execute };

/// Who is touching memory. Both contexts run at machine privilege; the tag
/// only records whether the caller is ROM code or untrusted firmware.
enum class ExecutionContext { RomTrusted, UntrustedM };

enum class AccessVerdict { Allow, Deny };

/// One pmpNcfg byte: bit0=R, bit1=W, bit2=X, bits3-4=A, bit7=L.
struct PmpConfig {
  bool read = false;
  bool write = false;
  bool execute = false;
  AddrMode mode = AddrMode::Off;
  bool lock = false;

  std::uint8_t encode() const noexcept;
  /// Throws Error(InvalidConfig) if bits 5-6 are set.
  static PmpConfig decode(std::uint8_t byte);

  /// R=0, W=1 is reserved by the privileged architecture.
  bool reserved() const noexcept { return write && !read; }

  static PmpConfig execute_only(AddrMode mode, bool lock) {
    return PmpConfig{false, false, true, mode, lock};
  }

  friend bool operator==(const PmpConfig&, const PmpConfig&) = default;
};

struct PmpEntry {
  PmpConfig config;
  std::uint32_t addr_reg = 0;  // physical address >> 2

  friend bool operator==(const PmpEntry&, const PmpEntry&) = default;
};

/// Inclusive physical address interval. Addresses are 34-bit on RV32, so
/// 64-bit storage is used.
struct AddressRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool contains(std::uint64_t addr) const noexcept { return addr >= lo && addr <= hi; }
  friend bool operator==(const AddressRange&, const AddressRange&) = default;
};

/// NAPOT encoding of a naturally aligned power-of-two region (size >= 8).
std::uint32_t napot_encode(std::uint64_t base, std::uint64_t size);

class PmpBank {
 public:
  static constexpr std::size_t kEntries = 8;

  /// Throws ReservedCombination for R=0/W=1, LockedEntry when the entry is
  /// locked or entry index+1 is a locked TOR entry (which pins this addr_reg).
  void configure(std::size_t index, const PmpConfig& config, std::uint32_t addr_reg);

  /// Range matched by entry `index`; nullopt for Off and for empty TOR.
  std::optional<AddressRange> match_range(std::size_t index) const;

  /// Lowest-index matching entry decides. Unlocked entries do not restrict
  /// machine mode; with no match, machine mode is allowed.
  AccessVerdict check(Access access, std::uint64_t addr, ExecutionContext ctx) const noexcept;

  /// Index of the lowest entry whose range contains addr.
  std::optional<std::size_t> matching_entry(std::uint64_t addr) const noexcept;

  const PmpEntry& entry(std::size_t index) const { return entries_.at(index); }

  /// Hardware reset: every entry cleared and unlocked.
  void reset() noexcept { entries_ = {}; }

 private:
  std::array<PmpEntry, kEntries> entries_{};
};

}  // namespace lirav
